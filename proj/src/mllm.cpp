#include "sschema/mllm.hpp"

#include <cstring>
#include <random>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sschema/canon.hpp"
#include "sschema/errors.hpp"
#include "sschema/hash.hpp"

namespace sschema {

namespace {

constexpr const char* kCurrentActionTemplate =
    "You are analyzing a screen recording of a user operating a desktop application.\n"
    "Below is a stateful screen schema for the current clip: the initial frame's\n"
    "visible texts, changed-region texts for each key frame, and cursor positions.\n"
    "Describe the user action performed in this clip and identify the tool in use.\n"
    "Answer with a single JSON object and nothing else, using exactly these keys:\n"
    "\"description\" (one sentence), \"category\" (the tool category), \"tool\" (the tool name).\n"
    "\n";

constexpr const char* kNextActionTemplate =
    "You are analyzing a screen recording of a user operating a desktop application.\n"
    "Below is a stateful screen schema for the current clip: the initial frame's\n"
    "visible texts, changed-region texts for each key frame, and cursor positions.\n"
    "Predict the user's most likely next action and the tool it will use.\n"
    "Answer with a single JSON object and nothing else, using exactly these keys:\n"
    "\"description\" (one sentence), \"category\" (the tool category), \"tool\" (the tool name).\n"
    "\n";

}  // namespace

std::string build_prompt(Task task, const std::string& schema_text) {
    const char* header =
        task == Task::current_action ? kCurrentActionTemplate : kNextActionTemplate;
    return std::string(header) + schema_text;
}

std::uint64_t request_digest(const GenRequest& request) {
    using namespace std::string_view_literals;
    std::uint64_t h = fnv1a64(std::string_view(request.prompt));
    h = fnv1a64("\x1f"sv, h);
    h = fnv1a64(std::string_view(request.schema_text), h);
    h = fnv1a64("\x1f"sv, h);
    h = fnv1a64(std::string_view(format_fixed4(request.decode.temperature)), h);
    h = fnv1a64(std::string_view(format_fixed4(request.decode.top_p)), h);
    h = fnv1a64(std::string_view(std::to_string(request.decode.max_tokens)), h);
    return h;
}

void MockMllmBackend::script(const GenRequest& request, GenResponse response) {
    script_[request_digest(request)] = std::move(response);
}

GenResponse MockMllmBackend::generate(const GenRequest& request) {
    auto it = script_.find(request_digest(request));
    if (it != script_.end()) return it->second;
    if (strict_) {
        throw ScriptingError("no scripted answer for request digest " +
                             hex64(request_digest(request)));
    }
    return GenResponse{"{}", std::nullopt};
}

GenResponse ReplayMllmBackend::generate(const GenRequest&) {
    if (next_ >= answers_.size()) {
        throw ScriptingError("replay backend exhausted after " +
                             std::to_string(answers_.size()) + " answers");
    }
    return GenResponse{answers_[next_++], std::nullopt};
}

GenResponse http_generate(const HttpEndpoint& endpoint, const GenRequest& request) {
    // split scheme://host:port and path
    std::string url = endpoint.url;
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ArgumentError("endpoint url must include a scheme: " + url);
    }
    std::size_t path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    const auto timeout_ms =
        std::chrono::milliseconds(static_cast<long>(endpoint.timeout_seconds * 1000));
    client.set_connection_timeout(timeout_ms);
    client.set_read_timeout(timeout_ms);
    client.set_write_timeout(timeout_ms);

    nlohmann::json body{{"model", endpoint.model},
                        {"prompt", request.prompt},
                        {"temperature", request.decode.temperature},
                        {"top_p", request.decode.top_p},
                        {"max_tokens", request.decode.max_tokens}};
    httplib::Result result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        if (result.error() == httplib::Error::ConnectionTimeout ||
            result.error() == httplib::Error::Read || result.error() == httplib::Error::Write) {
            throw TimeoutError("MLLM endpoint timed out: " + endpoint.url);
        }
        throw TransportError("MLLM endpoint unreachable: " + endpoint.url);
    }
    if (result->status < 200 || result->status >= 300) {
        throw TransportError("MLLM endpoint returned status " +
                             std::to_string(result->status));
    }
    nlohmann::json j = nlohmann::json::parse(result->body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        throw ProtocolError("MLLM response body lacks a string `text` field");
    }
    return GenResponse{j["text"].get<std::string>(), std::nullopt};
}

Matrix surrogate_embed(const std::string& text, int q_tokens, int dim) {
    if (q_tokens < 1 || dim < 1) throw ArgumentError("surrogate_embed: bad shape");
    std::mt19937_64 rng(fnv1a64(text));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(q_tokens, dim);
    for (double& v : m.data) v = dist(rng);
    return m;
}

ParsedAnswer parse_answer(const std::string& text, const ToolTaxonomy& taxonomy) {
    ParsedAnswer out;
    out.is_failure = true;

    // first top-level {...} block, honoring strings and escapes
    std::size_t start = text.find('{');
    if (start == std::string::npos) return out;
    int depth = 0;
    bool in_string = false, escaped = false;
    std::size_t end = std::string::npos;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            if (--depth == 0) {
                end = i;
                break;
            }
        }
    }
    if (end == std::string::npos) return out;

    nlohmann::json j = nlohmann::json::parse(text.substr(start, end - start + 1), nullptr,
                                             false);
    if (j.is_discarded() || !j.is_object()) return out;

    if (j.contains("description") && j["description"].is_string()) {
        out.description = j["description"].get<std::string>();
    }
    if (j.contains("category") && j["category"].is_string()) {
        out.category = j["category"].get<std::string>();
    }
    if (j.contains("tool") && j["tool"].is_string()) {
        out.tool = j["tool"].get<std::string>();
    }
    if (out.description.empty() || out.category.empty() || out.tool.empty()) return out;
    if (!taxonomy.validate(out.category, out.tool)) return out;

    out.is_failure = false;
    return out;
}

namespace {

std::string matrix_digest(const Matrix& m) {
    std::uint64_t h = kFnvOffset;
    for (double d : m.data) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        h = fnv1a64(bytes, 8, h);
    }
    return hex64(h);
}

}  // namespace

Transcript session_run(const std::vector<Clip>& clips, MllmBackendPort& backend,
                       OcrBackendPort& ocr, const ToolTaxonomy& taxonomy,
                       const std::vector<std::string>& vocab,
                       const CnnParams* cursor_params, MemoryInstance& memory,
                       const SessionConfig& config) {
    if (clips.empty()) throw ArgumentError("session_run: no clips");

    Transcript transcript;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        auto at_step = [&](const std::string& what) {
            return "step " + std::to_string(i) + ": " + what;
        };
        try {
            ScreenSchema schema =
                compose_schema(clips[i], config.schema, ocr, cursor_params, vocab);
            std::string schema_json = serialize_canonical(schema);
            std::string schema_text = render_prompt_schema(schema);
            std::string prompt = build_prompt(config.task, schema_text);

            GenRequest request{prompt, schema_text, config.decode};
            GenResponse response = backend.generate(request);

            Matrix embedding = response.embedding
                                   ? *response.embedding
                                   : surrogate_embed(response.answer + schema_text,
                                                     memory.config.q_tokens,
                                                     memory.config.dim);
            Matrix e_prime = memory_step(memory, embedding);

            TranscriptStep step;
            step.step = static_cast<int>(i);
            step.clip_id = clips[i].clip_id;
            step.schema_json = std::move(schema_json);
            step.prompt = std::move(prompt);
            step.answer = response.answer;
            step.parsed = parse_answer(response.answer, taxonomy);
            step.e_prime_digest = matrix_digest(e_prime);
            transcript.steps.push_back(std::move(step));
        } catch (const TimeoutError& e) {
            throw TimeoutError(at_step(e.what()));
        } catch (const TransportError& e) {
            throw TransportError(at_step(e.what()));
        } catch (const ProtocolError& e) {
            throw ProtocolError(at_step(e.what()));
        } catch (const ScriptingError& e) {
            throw ScriptingError(at_step(e.what()));
        } catch (const BackendError& e) {
            throw BackendError(at_step(e.what()));
        } catch (const Error& e) {
            throw Error(at_step(e.what()));
        }
    }
    return transcript;
}

std::string transcript_to_lines(const Transcript& transcript) {
    std::string out;
    for (const TranscriptStep& step : transcript.steps) {
        out += "{\"answer\":\"" + json_escape(step.answer) + "\"";
        out += ",\"clip_id\":\"" + json_escape(step.clip_id) + "\"";
        out += ",\"e_prime_digest\":\"" + step.e_prime_digest + "\"";
        out += ",\"parsed\":{\"category\":\"" + json_escape(step.parsed.category) + "\"";
        out += ",\"description\":\"" + json_escape(step.parsed.description) + "\"";
        out += ",\"is_failure\":" + std::string(step.parsed.is_failure ? "true" : "false");
        out += ",\"tool\":\"" + json_escape(step.parsed.tool) + "\"}";
        out += ",\"prompt\":\"" + json_escape(step.prompt) + "\"";
        out += ",\"schema\":\"" + json_escape(step.schema_json) + "\"";
        out += ",\"step\":" + std::to_string(step.step);
        out += "}\n";
    }
    return out;
}

double transcript_failure_rate(const Transcript& transcript) {
    if (transcript.steps.empty()) throw ArgumentError("empty transcript");
    int failures = 0;
    for (const TranscriptStep& step : transcript.steps) {
        if (step.parsed.is_failure) ++failures;
    }
    return static_cast<double>(failures) / static_cast<double>(transcript.steps.size());
}

}  // namespace sschema
