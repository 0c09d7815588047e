#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sschema/answer.hpp"
#include "sschema/matrix.hpp"
#include "sschema/memory.hpp"
#include "sschema/schema.hpp"
#include "sschema/taxonomy.hpp"

namespace sschema {

struct DecodeParams {
    double temperature = 0.0;
    double top_p = 0.7;
    int max_tokens = 256;
};

struct GenRequest {
    std::string prompt;       // full prompt including the schema text
    std::string schema_text;  // rendered schema, kept for digests/embeddings
    DecodeParams decode;
};

struct GenResponse {
    std::string answer;
    std::optional<Matrix> embedding;  // absent for remote backends
};

enum class Task { current_action, next_action };

// Per-task constant templates; byte-stable across runs.
std::string build_prompt(Task task, const std::string& schema_text);

// Stable digest over prompt, schema text, and decode parameters.
std::uint64_t request_digest(const GenRequest& request);

class MllmBackendPort {
public:
    virtual ~MllmBackendPort() = default;
    virtual GenResponse generate(const GenRequest& request) = 0;
};

// Scripted test double keyed by request digest. Strict mode raises
// ScriptingError on unscripted requests; lenient mode answers "{}".
class MockMllmBackend : public MllmBackendPort {
public:
    explicit MockMllmBackend(bool strict = false) : strict_(strict) {}
    void script(const GenRequest& request, GenResponse response);
    GenResponse generate(const GenRequest& request) override;

private:
    bool strict_;
    std::map<std::uint64_t, GenResponse> script_;
};

// Replays a fixed answer list in request order; used by the CLI mock
// backend, where request digests are not known up front.
class ReplayMllmBackend : public MllmBackendPort {
public:
    explicit ReplayMllmBackend(std::vector<std::string> answers)
        : answers_(std::move(answers)) {}
    GenResponse generate(const GenRequest& request) override;

private:
    std::vector<std::string> answers_;
    std::size_t next_ = 0;
};

struct HttpEndpoint {
    std::string url;  // e.g. http://127.0.0.1:8080/generate
    std::string model = "default";
    double timeout_seconds = 60.0;
};

// POST {model, prompt, temperature, top_p, max_tokens}; the response body
// must be JSON with a string `text` field.
GenResponse http_generate(const HttpEndpoint& endpoint, const GenRequest& request);

class HttpMllmBackend : public MllmBackendPort {
public:
    explicit HttpMllmBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    GenResponse generate(const GenRequest& request) override {
        return http_generate(endpoint_, request);
    }

private:
    HttpEndpoint endpoint_;
};

// Deterministic stand-in for backend hidden states: Q*D uniform(-1,1)
// draws seeded from a stable hash of the text.
Matrix surrogate_embed(const std::string& text, int q_tokens, int dim);

// Extracts the first top-level {...} block, requires string fields
// description/category/tool, and validates (category, tool) against the
// taxonomy. Never throws; breaches set is_failure.
ParsedAnswer parse_answer(const std::string& text, const ToolTaxonomy& taxonomy);

struct TranscriptStep {
    int step = 0;
    std::string clip_id;
    std::string schema_json;  // canonical serialization
    std::string prompt;
    std::string answer;
    ParsedAnswer parsed;
    std::string e_prime_digest;  // hex of the interpolated embedding bytes
};

struct Transcript {
    std::vector<TranscriptStep> steps;
};

struct SessionConfig {
    SchemaOptions schema;
    DecodeParams decode;
    Task task = Task::current_action;
};

// The session loop: compose -> render -> prompt -> generate -> parse ->
// embed -> memory step, strictly sequential over clips. Backend and
// schema errors abort with the step index in the message.
Transcript session_run(const std::vector<Clip>& clips, MllmBackendPort& backend,
                       OcrBackendPort& ocr, const ToolTaxonomy& taxonomy,
                       const std::vector<std::string>& vocab,
                       const CnnParams* cursor_params, MemoryInstance& memory,
                       const SessionConfig& config);

// One canonical JSON object per line, one line per step.
std::string transcript_to_lines(const Transcript& transcript);
double transcript_failure_rate(const Transcript& transcript);

}  // namespace sschema
