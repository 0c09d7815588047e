#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sschema/answer.hpp"
#include "sschema/taxonomy.hpp"

namespace sschema {

using TokenSeq = std::vector<std::string>;

// Lowercase, split on maximal runs of non-alphanumeric characters.
TokenSeq tokenize(std::string_view text);

// BLEU-n (n = 1 or 2): clipped n-gram precisions, geometric mean, brevity
// penalty against the closest reference length. No smoothing unless
// `smooth` adds epsilon to zero precisions.
double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int n,
            bool smooth = false);

// LCS-based F1.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// Exact-match variant: greedy longest-common-run alignment, recall-weighted
// harmonic mean F = 10PR/(R+9P), chunk penalty 0.5*(chunks/matches)^3.
double meteor(const TokenSeq& candidate, const TokenSeq& reference);

// Corpus CIDEr-D over n-grams 1..4: candidate counts clipped to each
// reference, idf over the reference sets, cosine similarity with a
// Gaussian length penalty (sigma = 6), scaled by 10.
double cider_d(const std::vector<TokenSeq>& candidates,
               const std::vector<std::vector<TokenSeq>>& references);

// Exact case-insensitive match fraction.
double accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& golds);

double failure_rate(const std::vector<ParsedAnswer>& parsed);

struct MetricReport {
    double bleu1 = 0.0;
    double bleu2 = 0.0;
    double rouge_l = 0.0;
    double meteor = 0.0;
    double cider_d = 0.0;
    double category_accuracy = 0.0;
    double tool_accuracy = 0.0;
    double failure_rate = 0.0;
    int count = 0;
};

struct EvalRecord {
    std::string id;
    std::string prediction;
    std::vector<std::string> references;
    std::string category_pred;
    std::string category_gold;
    std::string tool_pred;
    std::string tool_gold;
};

// One JSON object per line:
// {"id":...,"prediction":...,"references":[...],"category_pred":...,
//  "category_gold":...,"tool_pred":...,"tool_gold":...}
// Errors name the offending line number.
std::vector<EvalRecord> parse_eval_records(std::string_view text);

// Sentence metrics are averaged over records (max over references for
// ROUGE-L/METEOR); CIDEr-D is corpus-level. A record counts as a failure
// when its predicted (category, tool) pair is not in the taxonomy.
MetricReport evaluate_records(const std::vector<EvalRecord>& records,
                              const ToolTaxonomy& taxonomy);

// Fixed-width text report, one `name value` line per metric, 4 decimals.
std::string render_report(const MetricReport& report);

}  // namespace sschema
