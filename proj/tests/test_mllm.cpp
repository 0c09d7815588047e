#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "sschema/errors.hpp"
#include "sschema/mllm.hpp"

using namespace sschema;

namespace {

Frame make_frame(int w, int h, std::uint8_t fill, int index) {
    Frame f;
    f.width = w;
    f.height = h;
    f.luma.assign(static_cast<std::size_t>(w) * h, fill);
    f.index = index;
    f.timestamp_ms = static_cast<std::int64_t>(index) * 100;
    return f;
}

Clip popup_clip(const std::string& id, std::uint8_t popup_value) {
    Clip c;
    c.clip_id = id;
    for (int i = 0; i < 5; ++i) {
        Frame f = make_frame(32, 32, 10, i);
        if (i >= 2) {
            for (int y = 6; y < 12; ++y) {
                for (int x = 4; x < 12; ++x) f.at(x, y) = popup_value;
            }
        }
        c.frames.push_back(std::move(f));
    }
    c.end_ms = 400;
    return c;
}

GenRequest sample_request(const std::string& prompt) {
    return GenRequest{prompt, "schema", DecodeParams{}};
}

}  // namespace

TEST_CASE("build_prompt is task-specific, byte stable, and schema-bearing") {
    std::string schema_text = "resolution=8x8 span=0..100ms\n";
    std::string current = build_prompt(Task::current_action, schema_text);
    std::string next = build_prompt(Task::next_action, schema_text);

    for (const char* key : {"\"description\"", "\"category\"", "\"tool\""}) {
        CHECK(current.find(key) != std::string::npos);
        CHECK(next.find(key) != std::string::npos);
    }
    CHECK(current != next);
    CHECK(current.find(schema_text) != std::string::npos);
    CHECK(build_prompt(Task::current_action, schema_text) == current);
}

TEST_CASE("mock backend honors scripts and strictness") {
    GenRequest req = sample_request("p1");

    MockMllmBackend lenient(false);
    CHECK(lenient.generate(req).answer == "{}");

    lenient.script(req, GenResponse{"scripted", std::nullopt});
    CHECK(lenient.generate(req).answer == "scripted");

    GenRequest other = sample_request("p2");
    CHECK(lenient.generate(other).answer == "{}");

    MockMllmBackend strict(true);
    CHECK_THROWS_AS(strict.generate(req), ScriptingError);
}

TEST_CASE("replay backend returns answers in order") {
    ReplayMllmBackend replay({"a", "b"});
    CHECK(replay.generate(sample_request("x")).answer == "a");
    CHECK(replay.generate(sample_request("y")).answer == "b");
    CHECK_THROWS_AS(replay.generate(sample_request("z")), ScriptingError);
}

TEST_CASE("http backend speaks the POST protocol") {
    httplib::Server server;
    server.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("model"));
        REQUIRE(body.contains("prompt"));
        REQUIRE(body.contains("temperature"));
        REQUIRE(body.contains("top_p"));
        REQUIRE(body.contains("max_tokens"));
        res.set_content(R"({"text":"echoed"})", "application/json");
    });
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("nope", "text/plain");
    });
    server.Post("/notext", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"other":1})", "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::string base = "http://127.0.0.1:" + std::to_string(port);
    GenRequest req = sample_request("a prompt");

    GenResponse ok = http_generate(HttpEndpoint{base + "/generate"}, req);
    CHECK(ok.answer == "echoed");
    CHECK(!ok.embedding.has_value());

    CHECK_THROWS_AS(http_generate(HttpEndpoint{base + "/fail"}, req), TransportError);
    CHECK_THROWS_AS(http_generate(HttpEndpoint{base + "/notext"}, req), ProtocolError);

    server.stop();
    listener.join();

    CHECK_THROWS_AS(http_generate(HttpEndpoint{"http://127.0.0.1:1/generate", "m", 0.5}, req),
                    TransportError);
}

TEST_CASE("surrogate embedding is a pure function of the text") {
    Matrix a = surrogate_embed("hello", 4, 8);
    Matrix b = surrogate_embed("hello", 4, 8);
    CHECK(a == b);
    CHECK(a.rows == 4);
    CHECK(a.cols == 8);
    for (double v : a.data) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }

    Matrix empty = surrogate_embed("", 2, 2);
    CHECK(empty.data.size() == 4);

    Matrix c = surrogate_embed("hellp", 4, 8);
    CHECK(!(c == a));
}

TEST_CASE("parse_answer classifies formatting failures as data") {
    const ToolTaxonomy& tax = ToolTaxonomy::embedded();

    ParsedAnswer good = parse_answer(
        R"({"description":"opens the Move tool","category":"Move","tool":"Move Tool"})", tax);
    CHECK(!good.is_failure);
    CHECK(good.description == "opens the Move tool");

    ParsedAnswer prose = parse_answer("the user moved the layer around", tax);
    CHECK(prose.is_failure);
    CHECK(prose.description.empty());

    ParsedAnswer cross = parse_answer(
        R"({"description":"d","category":"Move","tool":"Lasso Tool"})", tax);
    CHECK(cross.is_failure);
    CHECK(cross.category == "Move");  // fields preserved for audit
    CHECK(cross.tool == "Lasso Tool");

    ParsedAnswer missing = parse_answer(R"({"description":"d","category":"Move"})", tax);
    CHECK(missing.is_failure);
    CHECK(missing.description == "d");

    ParsedAnswer broken = parse_answer("{not json}", tax);
    CHECK(broken.is_failure);

    ParsedAnswer unbalanced = parse_answer("{\"description\":\"x\"", tax);
    CHECK(unbalanced.is_failure);

    // surrounding prose is fine; the first top-level object wins
    ParsedAnswer wrapped = parse_answer(
        "Sure! Here you go: {\"description\":\"selects with the {magic} wand\","
        "\"category\":\"Object Selection\",\"tool\":\"Magic Wand Tool\"} hope that helps",
        tax);
    CHECK(!wrapped.is_failure);
    CHECK(wrapped.tool == "Magic Wand Tool");
}

TEST_CASE("session_run walks clips sequentially through the memory") {
    std::vector<Clip> clips{popup_clip("c0", 200), popup_clip("c1", 220),
                            popup_clip("c2", 240)};
    MockOcrBackend ocr;
    ReplayMllmBackend backend({
        R"({"description":"opens a dialog","category":"Move","tool":"Move Tool"})",
        "no object here",
        R"({"description":"paints","category":"Paint","tool":"Gradient Tool"})",
    });
    MemoryInstance memory = make_memory(MemoryConfig{4, 8, 0.5, 42});
    SessionConfig config;
    config.schema.k = 1;

    Transcript transcript = session_run(clips, backend, ocr, ToolTaxonomy::embedded(), {},
                                        nullptr, memory, config);
    REQUIRE(transcript.steps.size() == 3);
    CHECK(memory.state.t == 3);
    CHECK(transcript.steps[0].clip_id == "c0");
    CHECK(!transcript.steps[0].parsed.is_failure);
    CHECK(transcript.steps[1].parsed.is_failure);
    CHECK(!transcript.steps[2].parsed.is_failure);
    CHECK(transcript_failure_rate(transcript) == doctest::Approx(1.0 / 3.0));

    for (const auto& step : transcript.steps) {
        CHECK(step.e_prime_digest.size() == 16);
        CHECK(!step.schema_json.empty());
        CHECK(step.prompt.find("screen schema") != std::string::npos);
    }

    // single clip -> memory stepped exactly once
    MemoryInstance memory_one = make_memory(MemoryConfig{4, 8, 0.5, 42});
    ReplayMllmBackend backend_one({"{}"});
    std::vector<Clip> one{popup_clip("only", 200)};
    Transcript t1 = session_run(one, backend_one, ocr, ToolTaxonomy::embedded(), {}, nullptr,
                                memory_one, config);
    CHECK(t1.steps.size() == 1);
    CHECK(memory_one.state.t == 1);

    CHECK_THROWS_AS(session_run({}, backend, ocr, ToolTaxonomy::embedded(), {}, nullptr,
                                memory, config),
                    ArgumentError);
}

TEST_CASE("session transcripts are byte-identical across runs") {
    auto run_once = [](std::uint64_t memory_seed) {
        std::vector<Clip> clips{popup_clip("c0", 200), popup_clip("c1", 220)};
        MockOcrBackend ocr;
        ReplayMllmBackend backend({"answer one", "answer two"});
        MemoryInstance memory = make_memory(MemoryConfig{4, 8, 0.5, memory_seed});
        SessionConfig config;
        config.schema.k = 1;
        return transcript_to_lines(session_run(clips, backend, ocr,
                                               ToolTaxonomy::embedded(), {}, nullptr, memory,
                                               config));
    };
    CHECK(run_once(42) == run_once(42));
}

TEST_CASE("alpha=1 sessions ignore memory parameters end to end") {
    auto digests = [](std::uint64_t memory_seed) {
        std::vector<Clip> clips{popup_clip("c0", 200), popup_clip("c1", 220),
                                popup_clip("c2", 240)};
        MockOcrBackend ocr;
        ReplayMllmBackend backend({"a", "b", "c"});
        MemoryInstance memory = make_memory(MemoryConfig{4, 8, 1.0, memory_seed});
        SessionConfig config;
        config.schema.k = 1;
        Transcript t = session_run(clips, backend, ocr, ToolTaxonomy::embedded(), {}, nullptr,
                                   memory, config);
        std::vector<std::string> out;
        for (const auto& s : t.steps) out.push_back(s.e_prime_digest);
        return out;
    };
    CHECK(digests(1) == digests(31337));
}

TEST_CASE("backend errors abort the session with step context") {
    std::vector<Clip> clips{popup_clip("c0", 200), popup_clip("c1", 220)};
    MockOcrBackend ocr;
    ReplayMllmBackend backend({"only one"});
    MemoryInstance memory = make_memory(MemoryConfig{4, 8, 0.5, 42});
    SessionConfig config;
    config.schema.k = 1;
    try {
        session_run(clips, backend, ocr, ToolTaxonomy::embedded(), {}, nullptr, memory,
                    config);
        FAIL("expected ScriptingError");
    } catch (const ScriptingError& e) {
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
}

TEST_CASE("transcript lines are canonical json") {
    Transcript t;
    TranscriptStep s;
    s.step = 0;
    s.clip_id = "clip \"quoted\"";
    s.schema_json = "{\"version\":\"1\"}\n";
    s.prompt = "line1\nline2";
    s.answer = "an answer";
    s.parsed.is_failure = true;
    s.e_prime_digest = "00ff00ff00ff00ff";
    t.steps.push_back(s);

    std::string lines = transcript_to_lines(t);
    CHECK(lines ==
          "{\"answer\":\"an answer\",\"clip_id\":\"clip \\\"quoted\\\"\","
          "\"e_prime_digest\":\"00ff00ff00ff00ff\",\"parsed\":{\"category\":\"\","
          "\"description\":\"\",\"is_failure\":true,\"tool\":\"\"},"
          "\"prompt\":\"line1\\nline2\",\"schema\":\"{\\\"version\\\":\\\"1\\\"}\\n\","
          "\"step\":0}\n");
}
