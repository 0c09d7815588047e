#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sschema/errors.hpp"
#include "sschema/schema.hpp"

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

Clip constant_clip(int t) {
    Clip c;
    c.clip_id = "constant";
    for (int i = 0; i < t; ++i) c.frames.push_back(make_frame(16, 16, 40, i));
    c.start_ms = 0;
    c.end_ms = c.frames.back().timestamp_ms;
    return c;
}

// static 32x32 scene; an 8x6 popup at (4,6) appears at frame 2 and stays
Clip popup_clip(int total_frames = 5) {
    Clip c;
    c.clip_id = "popup";
    for (int i = 0; i < total_frames; ++i) {
        Frame f = make_frame(32, 32, 10, i);
        if (i >= 2) {
            for (int y = 6; y < 12; ++y) {
                for (int x = 4; x < 12; ++x) f.at(x, y) = 200;
            }
        }
        c.frames.push_back(std::move(f));
    }
    c.start_ms = 0;
    c.end_ms = c.frames.back().timestamp_ms;
    return c;
}

SchemaOptions options_with_k(int k) {
    SchemaOptions o;
    o.k = k;
    return o;
}

}  // namespace

TEST_CASE("compose on a constant clip keeps element lists empty") {
    Clip clip = constant_clip(6);
    MockOcrBackend ocr;
    ScreenSchema schema = compose_schema(clip, options_with_k(2), ocr, nullptr, {});

    REQUIRE(schema.frames.size() == 3);  // initial + 2 key frames
    CHECK(schema.frames[0].is_initial);
    CHECK(schema.frames[0].index == 0);
    // all-zero scores tie toward the earliest eligible frames
    CHECK(schema.frames[1].index == 2);
    CHECK(schema.frames[2].index == 3);
    for (const auto& frame : schema.frames) {
        CHECK(frame.elements.empty());
        CHECK(!frame.cursor.has_value());
    }
    CHECK(schema.clip_id == "constant");
    CHECK(schema.width == 16);

    Clip tiny = constant_clip(2);
    CHECK_THROWS_AS(compose_schema(tiny, options_with_k(2), ocr, nullptr, {}), SizeError);
}

TEST_CASE("compose extracts changed-region text and matches the vocabulary") {
    Clip clip = popup_clip();
    MockOcrBackend ocr;
    ocr.script(0, Rect{0, 0, 32, 32}, {{"File", Rect{3, 2, 10, 5}, 0.88}});
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.9}});

    ScreenSchema schema = compose_schema(clip, options_with_k(1), ocr, nullptr, {"OK"});
    REQUIRE(schema.frames.size() == 2);

    const FrameEntry& initial = schema.frames[0];
    REQUIRE(initial.elements.size() == 1);
    CHECK(initial.elements[0].text == "File");
    CHECK(initial.elements[0].source == ElementSource::initial_frame);
    CHECK(!initial.elements[0].matched_item.has_value());

    const FrameEntry& key = schema.frames[1];
    CHECK(key.index == 2);
    REQUIRE(key.elements.size() == 1);
    const ElementEntry& popup = key.elements[0];
    CHECK(popup.text == "OK");
    CHECK(popup.source == ElementSource::changed_region);
    CHECK(popup.bbox == Rect{5, 7, 4, 3});
    REQUIRE(popup.matched_item.has_value());
    CHECK(*popup.matched_item == "OK");
    CHECK(*popup.match_score == doctest::Approx(1.0));
}

TEST_CASE("serialize produces canonical bytes") {
    Clip clip = popup_clip();
    MockOcrBackend ocr;
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.85}});

    ScreenSchema schema = compose_schema(clip, options_with_k(1), ocr, nullptr, {"OK"});
    std::string bytes = serialize_canonical(schema);

    // stated formatting rule: scores carry exactly 4 decimals
    CHECK(bytes.find("\"confidence\":0.8500") != std::string::npos);
    CHECK(bytes.find("\"match_score\":1.0000") != std::string::npos);
    CHECK(bytes.back() == '\n');
    CHECK(bytes.find('\n') == bytes.size() - 1);
    CHECK(bytes.find(' ') == std::string::npos);

    // two composes of the same fixture are byte-identical
    MockOcrBackend ocr2;
    ocr2.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.85}});
    ScreenSchema again = compose_schema(clip, options_with_k(1), ocr2, nullptr, {"OK"});
    CHECK(serialize_canonical(again) == bytes);
}

TEST_CASE("serialize and parse round-trip both directions") {
    Clip clip = popup_clip();
    MockOcrBackend ocr;
    ocr.script(0, Rect{0, 0, 32, 32}, {{"File", Rect{3, 2, 10, 5}, 0.75}});
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.9}});
    ScreenSchema schema = compose_schema(clip, options_with_k(1), ocr, nullptr, {"OK"});

    std::string bytes = serialize_canonical(schema);
    ScreenSchema parsed = parse_schema(bytes);
    CHECK(serialize_canonical(parsed) == bytes);
    CHECK(parse_schema(serialize_canonical(parsed)) == parsed);

    // parse accepts any field order and whitespace
    std::string shuffled =
        R"({"version": "1", "resolution": [8, 8], "frames": [{"timestamp_ms": 0,
            "is_initial": true, "index": 0, "elements": []}],
            "clip_span": [0, 0], "clip_id": "x"})";
    ScreenSchema s = parse_schema(shuffled);
    CHECK(s.clip_id == "x");
    CHECK(s.frames.size() == 1);
}

TEST_CASE("parse rejects invalid documents") {
    std::string base =
        R"({"clip_id":"x","clip_span":[0,0],"frames":[{"elements":[],"index":0,"is_initial":true,"timestamp_ms":0}],"resolution":[8,8],"version":"VER"})";

    std::string v2 = base;
    v2.replace(v2.find("VER"), 3, "2");
    CHECK_THROWS_AS(parse_schema(v2), VersionError);

    // match_score without matched_item
    std::string bad_pair =
        R"({"clip_id":"x","clip_span":[0,0],"frames":[{"elements":[
            {"bbox":[0,0,2,2],"confidence":0.5,"match_score":0.9,"source":"initial_frame","text":"a"}
           ],"index":0,"is_initial":true,"timestamp_ms":0}],"resolution":[8,8],"version":"1"})";
    CHECK_THROWS_AS(parse_schema(bad_pair), ValidationError);

    // bbox outside the resolution
    std::string bad_bbox =
        R"({"clip_id":"x","clip_span":[0,0],"frames":[{"elements":[
            {"bbox":[7,0,2,2],"confidence":0.5,"source":"initial_frame","text":"a"}
           ],"index":0,"is_initial":true,"timestamp_ms":0}],"resolution":[8,8],"version":"1"})";
    CHECK_THROWS_AS(parse_schema(bad_bbox), ValidationError);

    // no initial frame
    std::string no_initial =
        R"({"clip_id":"x","clip_span":[0,0],"frames":[{"elements":[],"index":2,"is_initial":false,"timestamp_ms":0}],"resolution":[8,8],"version":"1"})";
    CHECK_THROWS_AS(parse_schema(no_initial), ValidationError);

    CHECK_THROWS_AS(parse_schema("not json"), ValidationError);

    try {
        parse_schema(bad_pair);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        // the error names the offending field path
        CHECK(std::string(e.what()).find("elements[0]") != std::string::npos);
    }
}

TEST_CASE("non-finite scores refuse to serialize") {
    ScreenSchema schema;
    schema.clip_id = "x";
    schema.width = 8;
    schema.height = 8;
    FrameEntry frame;
    frame.is_initial = true;
    ElementEntry element;
    element.bbox = Rect{0, 0, 2, 2};
    element.text = "a";
    element.confidence = std::numeric_limits<double>::quiet_NaN();
    frame.elements.push_back(element);
    schema.frames.push_back(frame);
    CHECK_THROWS_AS(serialize_canonical(schema), SerializationError);
}

TEST_CASE("render_prompt_schema emits the compact text form") {
    Clip clip = popup_clip();
    MockOcrBackend ocr;
    ocr.script(0, Rect{0, 0, 32, 32}, {{"File", Rect{3, 2, 10, 5}, 0.88}});
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.9}});
    ScreenSchema schema = compose_schema(clip, options_with_k(1), ocr, nullptr, {"OK"});

    std::string expected =
        "resolution=32x32 span=0..400ms\n"
        "t=0 initial\n"
        "  [2,3,10,5] \"File\"\n"
        "t=200\n"
        "  [7,5,4,3] \"OK\" -> OK\n";
    CHECK(render_prompt_schema(schema) == expected);

    // empty-elements schema renders header + frame lines only
    Clip flat = constant_clip(4);
    MockOcrBackend empty_ocr;
    ScreenSchema plain = compose_schema(flat, options_with_k(1), empty_ocr, nullptr, {});
    std::string text = render_prompt_schema(plain);
    CHECK(text == "resolution=16x16 span=0..300ms\nt=0 initial\nt=200\n");
}

TEST_CASE("rendering distinguishes distinct fixture schemas") {
    MockOcrBackend ocr;
    ocr.script(0, Rect{0, 0, 32, 32}, {{"File", Rect{3, 2, 10, 5}, 0.88}});
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.9}});

    std::vector<std::string> renderings;
    renderings.push_back(render_prompt_schema(
        compose_schema(popup_clip(), options_with_k(1), ocr, nullptr, {"OK"})));
    renderings.push_back(render_prompt_schema(
        compose_schema(popup_clip(), options_with_k(1), ocr, nullptr, {})));
    renderings.push_back(render_prompt_schema(
        compose_schema(popup_clip(), options_with_k(2), ocr, nullptr, {"OK"})));
    MockOcrBackend empty_ocr;
    renderings.push_back(render_prompt_schema(
        compose_schema(constant_clip(5), options_with_k(1), empty_ocr, nullptr, {})));

    std::set<std::string> unique(renderings.begin(), renderings.end());
    CHECK(unique.size() == renderings.size());
}

TEST_CASE("appending unchanged frames does not grow the schema") {
    MockOcrBackend ocr;
    ocr.script(0, Rect{0, 0, 32, 32}, {{"File", Rect{3, 2, 10, 5}, 0.88}});
    ocr.script(2, Rect{4, 6, 8, 6}, {{"OK", Rect{5, 7, 4, 3}, 0.9}});

    Clip base = popup_clip(5);
    std::string short_bytes =
        serialize_canonical(compose_schema(base, options_with_k(1), ocr, nullptr, {"OK"}));

    Clip longer = popup_clip(9);  // four more static frames, span 0..800
    std::string long_bytes =
        serialize_canonical(compose_schema(longer, options_with_k(1), ocr, nullptr, {"OK"}));

    CHECK(long_bytes.size() <= short_bytes.size());
}

TEST_CASE("ocr backend errors carry frame and rect context") {
    struct FailingOcr : OcrBackendPort {
        std::vector<OcrResult> recognize(const Frame&, const Rect&) override {
            throw BackendError("child exploded");
        }
    } failing;
    Clip clip = popup_clip();
    try {
        compose_schema(clip, options_with_k(1), failing, nullptr, {});
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        std::string what = e.what();
        CHECK(what.find("frame 0") != std::string::npos);
        CHECK(what.find("child exploded") != std::string::npos);
    }
}
