#include "sschema/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "sschema/canon.hpp"
#include "sschema/errors.hpp"

namespace sschema {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const TokenSeq& tokens, int n) {
    std::map<Ngram, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)] += 1;
    }
    return counts;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::string cur;
    for (unsigned char c : text) {
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            cur += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int n,
            bool smooth) {
    if (references.empty()) throw ArgumentError("bleu: references must not be empty");
    if (n != 1 && n != 2) throw ArgumentError("bleu: n must be 1 or 2");
    const int c = static_cast<int>(candidate.size());
    if (c == 0) return 0.0;

    constexpr double kEps = 1e-9;
    double log_sum = 0.0;
    for (int m = 1; m <= n; ++m) {
        auto cand_counts = ngram_counts(candidate, m);
        long total = 0;
        for (const auto& [gram, count] : cand_counts) total += count;
        if (total == 0) return 0.0;  // candidate shorter than m

        std::vector<std::map<Ngram, int>> ref_counts;
        ref_counts.reserve(references.size());
        for (const auto& ref : references) ref_counts.push_back(ngram_counts(ref, m));

        long clipped = 0;
        for (const auto& [gram, count] : cand_counts) {
            int max_ref = 0;
            for (const auto& rc : ref_counts) {
                auto it = rc.find(gram);
                if (it != rc.end()) max_ref = std::max(max_ref, it->second);
            }
            clipped += std::min(count, max_ref);
        }
        double precision = static_cast<double>(clipped) / static_cast<double>(total);
        if (precision == 0.0) {
            if (!smooth) return 0.0;
            precision = kEps;
        }
        log_sum += std::log(precision);
    }
    double geo = std::exp(log_sum / n);

    // closest reference length; ties go to the shorter reference
    int r = static_cast<int>(references[0].size());
    for (const auto& ref : references) {
        int len = static_cast<int>(ref.size());
        if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
            r = len;
        }
    }
    double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
    return geo * bp;
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    const std::size_t n = candidate.size(), m = reference.size();
    if (n == 0 || m == 0) return 0.0;
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (candidate[i - 1] == reference[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    int l = prev[m];
    if (l == 0) return 0.0;
    double p = static_cast<double>(l) / n;
    double r = static_cast<double>(l) / m;
    return 2.0 * p * r / (p + r);
}

double meteor(const TokenSeq& candidate, const TokenSeq& reference) {
    const std::size_t n = candidate.size(), m = reference.size();
    if (n == 0 || m == 0) return 0.0;

    // greedy longest-common-run alignment; each selected run is one chunk
    std::vector<bool> cand_free(n, true), ref_free(m, true);
    int matches = 0, chunks = 0;
    for (;;) {
        std::size_t best_len = 0, best_i = 0, best_j = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t k = 0;
                while (i + k < n && j + k < m && cand_free[i + k] && ref_free[j + k] &&
                       candidate[i + k] == reference[j + k]) {
                    ++k;
                }
                if (k > best_len) {
                    best_len = k;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_len == 0) break;
        for (std::size_t k = 0; k < best_len; ++k) {
            cand_free[best_i + k] = false;
            ref_free[best_j + k] = false;
        }
        matches += static_cast<int>(best_len);
        ++chunks;
    }
    if (matches == 0) return 0.0;
    double p = static_cast<double>(matches) / n;
    double r = static_cast<double>(matches) / m;
    double f = 10.0 * p * r / (r + 9.0 * p);
    double frag = static_cast<double>(chunks) / matches;
    double penalty = 0.5 * frag * frag * frag;
    return f * (1.0 - penalty);
}

double cider_d(const std::vector<TokenSeq>& candidates,
               const std::vector<std::vector<TokenSeq>>& references) {
    if (candidates.size() != references.size()) {
        throw ArgumentError("cider_d: candidates and references differ in length");
    }
    if (candidates.empty()) throw ArgumentError("cider_d: empty corpus");
    for (const auto& refs : references) {
        if (refs.empty()) throw ArgumentError("cider_d: each reference list must be non-empty");
    }

    constexpr int kMaxN = 4;
    constexpr double kSigma = 6.0;
    const double n_images = static_cast<double>(references.size());

    // document frequency over reference sets
    std::map<Ngram, int> df[kMaxN];
    for (const auto& refs : references) {
        std::set<Ngram> seen[kMaxN];
        for (const auto& ref : refs) {
            for (int n = 1; n <= kMaxN; ++n) {
                for (const auto& [gram, count] : ngram_counts(ref, n)) {
                    seen[n - 1].insert(gram);
                }
            }
        }
        for (int n = 0; n < kMaxN; ++n) {
            for (const auto& gram : seen[n]) df[n][gram] += 1;
        }
    }

    double corpus = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const TokenSeq& cand = candidates[i];
        double per_ref_sum = 0.0;
        for (const auto& ref : references[i]) {
            double sim_sum = 0.0;
            for (int n = 1; n <= kMaxN; ++n) {
                auto cc = ngram_counts(cand, n);
                auto rc = ngram_counts(ref, n);
                double dot = 0.0, norm_c = 0.0, norm_r = 0.0;
                for (const auto& [gram, rcount] : rc) {
                    double idf = std::log(n_images / df[n - 1].at(gram));
                    double rv = rcount * idf;
                    auto it = cc.find(gram);
                    int clipped = it == cc.end() ? 0 : std::min(it->second, rcount);
                    double cv = clipped * idf;
                    dot += cv * rv;
                    norm_c += cv * cv;
                    norm_r += rv * rv;
                }
                if (norm_c > 0.0 && norm_r > 0.0) {
                    double cos = dot / (std::sqrt(norm_c) * std::sqrt(norm_r));
                    double delta = static_cast<double>(cand.size()) -
                                   static_cast<double>(ref.size());
                    sim_sum += cos * std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
                }
            }
            per_ref_sum += 10.0 * sim_sum / kMaxN;
        }
        corpus += per_ref_sum / static_cast<double>(references[i].size());
    }
    return corpus / static_cast<double>(candidates.size());
}

double accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
    if (preds.empty() || preds.size() != golds.size()) {
        throw ArgumentError("accuracy: inputs must be equal-length and non-empty");
    }
    int hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (lower_ascii(preds[i]) == lower_ascii(golds[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double failure_rate(const std::vector<ParsedAnswer>& parsed) {
    if (parsed.empty()) throw ArgumentError("failure_rate: empty input");
    int failures = 0;
    for (const auto& p : parsed) {
        if (p.is_failure) ++failures;
    }
    return static_cast<double>(failures) / static_cast<double>(parsed.size());
}

std::vector<EvalRecord> parse_eval_records(std::string_view text) {
    std::vector<EvalRecord> records;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        auto bad = [&](const std::string& what) -> ValidationError {
            return ValidationError("records line " + std::to_string(line_no) + ": " + what);
        };
        if (j.is_discarded() || !j.is_object()) throw bad("not a JSON object");
        for (const char* field : {"id", "prediction", "category_pred", "category_gold",
                                  "tool_pred", "tool_gold"}) {
            if (!j.contains(field) || !j[field].is_string()) {
                throw bad(std::string("missing string field ") + field);
            }
        }
        if (!j.contains("references") || !j["references"].is_array() ||
            j["references"].empty()) {
            throw bad("missing non-empty array field references");
        }
        EvalRecord r;
        r.id = j["id"].get<std::string>();
        r.prediction = j["prediction"].get<std::string>();
        for (const auto& ref : j["references"]) {
            if (!ref.is_string()) throw bad("references must be strings");
            r.references.push_back(ref.get<std::string>());
        }
        r.category_pred = j["category_pred"].get<std::string>();
        r.category_gold = j["category_gold"].get<std::string>();
        r.tool_pred = j["tool_pred"].get<std::string>();
        r.tool_gold = j["tool_gold"].get<std::string>();
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ValidationError("records: no records found");
    return records;
}

MetricReport evaluate_records(const std::vector<EvalRecord>& records,
                              const ToolTaxonomy& taxonomy) {
    if (records.empty()) throw ArgumentError("evaluate_records: empty input");

    MetricReport report;
    report.count = static_cast<int>(records.size());

    std::vector<TokenSeq> candidates;
    std::vector<std::vector<TokenSeq>> references;
    std::vector<std::string> cat_pred, cat_gold, tool_pred, tool_gold;
    std::vector<ParsedAnswer> parsed;

    for (const auto& r : records) {
        TokenSeq cand = tokenize(r.prediction);
        std::vector<TokenSeq> refs;
        for (const auto& ref : r.references) refs.push_back(tokenize(ref));

        report.bleu1 += bleu(cand, refs, 1);
        report.bleu2 += bleu(cand, refs, 2);
        double best_rouge = 0.0, best_meteor = 0.0;
        for (const auto& ref : refs) {
            best_rouge = std::max(best_rouge, rouge_l(cand, ref));
            best_meteor = std::max(best_meteor, meteor(cand, ref));
        }
        report.rouge_l += best_rouge;
        report.meteor += best_meteor;

        candidates.push_back(std::move(cand));
        references.push_back(std::move(refs));
        cat_pred.push_back(r.category_pred);
        cat_gold.push_back(r.category_gold);
        tool_pred.push_back(r.tool_pred);
        tool_gold.push_back(r.tool_gold);

        ParsedAnswer p;
        p.description = r.prediction;
        p.category = r.category_pred;
        p.tool = r.tool_pred;
        p.is_failure = r.prediction.empty() ||
                       !taxonomy.validate(r.category_pred, r.tool_pred);
        parsed.push_back(std::move(p));
    }

    const double n = static_cast<double>(records.size());
    report.bleu1 /= n;
    report.bleu2 /= n;
    report.rouge_l /= n;
    report.meteor /= n;
    report.cider_d = cider_d(candidates, references);
    report.category_accuracy = accuracy(cat_pred, cat_gold);
    report.tool_accuracy = accuracy(tool_pred, tool_gold);
    report.failure_rate = failure_rate(parsed);
    return report;
}

std::string render_report(const MetricReport& report) {
    std::string out;
    out += "bleu1 " + format_fixed4(report.bleu1) + "\n";
    out += "bleu2 " + format_fixed4(report.bleu2) + "\n";
    out += "rouge_l " + format_fixed4(report.rouge_l) + "\n";
    out += "meteor " + format_fixed4(report.meteor) + "\n";
    out += "cider_d " + format_fixed4(report.cider_d) + "\n";
    out += "category_accuracy " + format_fixed4(report.category_accuracy) + "\n";
    out += "tool_accuracy " + format_fixed4(report.tool_accuracy) + "\n";
    out += "failure_rate " + format_fixed4(report.failure_rate) + "\n";
    out += "count " + std::to_string(report.count) + "\n";
    return out;
}

}  // namespace sschema
