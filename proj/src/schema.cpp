#include "sschema/schema.hpp"

#include <algorithm>
#include <tuple>

#include <nlohmann/json.hpp>

#include "sschema/canon.hpp"
#include "sschema/errors.hpp"
#include "sschema/keyframe.hpp"

namespace sschema {

namespace {

bool element_order(const ElementEntry& a, const ElementEntry& b) {
    return std::tie(a.bbox.y, a.bbox.x, a.text) < std::tie(b.bbox.y, b.bbox.x, b.text);
}

void match_element(ElementEntry& element, const std::vector<std::string>& vocab) {
    if (vocab.empty()) return;
    auto match = match_menu_item(element.text, vocab);
    if (match) {
        element.matched_item = match->first;
        element.match_score = match->second;
    }
}

std::string source_name(ElementSource source) {
    return source == ElementSource::initial_frame ? "initial_frame" : "changed_region";
}

}  // namespace

ScreenSchema compose_schema(const Clip& clip, const SchemaOptions& options,
                            OcrBackendPort& ocr, const CnnParams* cursor_params,
                            const std::vector<std::string>& vocab) {
    KeyframeSelection selection = select_keyframes(clip, options.k);

    const Frame& first = clip.frames.front();
    ScreenSchema schema;
    schema.clip_id = clip.clip_id;
    schema.width = first.width;
    schema.height = first.height;
    schema.start_ms = clip.start_ms;
    schema.end_ms = clip.end_ms;

    auto recognize = [&](const Frame& frame, const Rect& rect) {
        try {
            return ocr.recognize(frame, rect);
        } catch (const BackendError& e) {
            throw BackendError("frame " + std::to_string(frame.index) + " rect (" +
                               std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                               std::to_string(rect.w) + "," + std::to_string(rect.h) +
                               "): " + e.what());
        }
    };

    FrameEntry initial;
    initial.index = first.index;
    initial.timestamp_ms = first.timestamp_ms;
    initial.is_initial = true;
    Rect full{0, 0, first.width, first.height};
    for (const OcrResult& r : recognize(first, full)) {
        ElementEntry element;
        element.bbox = r.bbox;
        element.text = r.text;
        element.confidence = r.confidence;
        element.source = ElementSource::initial_frame;
        match_element(element, vocab);
        initial.elements.push_back(std::move(element));
    }
    std::sort(initial.elements.begin(), initial.elements.end(), element_order);
    schema.frames.push_back(std::move(initial));

    for (int t : selection.indices) {
        const Frame& prev = clip.frames[t - 1];
        const Frame& cur = clip.frames[t];

        FrameEntry entry;
        entry.index = cur.index;
        entry.timestamp_ms = cur.timestamp_ms;

        ChangeMask mask = change_mask(prev, cur, options.delta);
        std::vector<Rect> rects =
            merge_rects(connected_components(mask, options.min_area), options.merge_gap);
        for (const Rect& rect : rects) {
            for (const OcrResult& r : recognize(cur, rect)) {
                ElementEntry element;
                element.bbox = r.bbox;
                element.text = r.text;
                element.confidence = r.confidence;
                element.source = ElementSource::changed_region;
                match_element(element, vocab);
                entry.elements.push_back(std::move(element));
            }
        }
        std::sort(entry.elements.begin(), entry.elements.end(), element_order);

        if (cursor_params) {
            CursorPrediction pred = detect_cursor(*cursor_params, cur);
            entry.cursor = CursorEntry{pred.x, pred.y, pred.confidence};
        }
        schema.frames.push_back(std::move(entry));
    }
    return schema;
}

std::string serialize_canonical(const ScreenSchema& schema) {
    std::string out;
    out += "{\"clip_id\":\"" + json_escape(schema.clip_id) + "\"";
    out += ",\"clip_span\":[" + std::to_string(schema.start_ms) + "," +
           std::to_string(schema.end_ms) + "]";
    out += ",\"frames\":[";
    bool first_frame = true;
    for (const FrameEntry& frame : schema.frames) {
        if (!first_frame) out += ",";
        first_frame = false;
        out += "{";
        if (frame.cursor) {
            out += "\"cursor\":[" + std::to_string(frame.cursor->x) + "," +
                   std::to_string(frame.cursor->y) + "," +
                   format_fixed4(frame.cursor->confidence) + "],";
        }
        out += "\"elements\":[";
        bool first_element = true;
        for (const ElementEntry& element : frame.elements) {
            if (!first_element) out += ",";
            first_element = false;
            out += "{\"bbox\":[" + std::to_string(element.bbox.x) + "," +
                   std::to_string(element.bbox.y) + "," + std::to_string(element.bbox.w) +
                   "," + std::to_string(element.bbox.h) + "]";
            out += ",\"confidence\":" + format_fixed4(element.confidence);
            if (element.match_score) {
                out += ",\"match_score\":" + format_fixed4(*element.match_score);
            }
            if (element.matched_item) {
                out += ",\"matched_item\":\"" + json_escape(*element.matched_item) + "\"";
            }
            out += ",\"source\":\"" + source_name(element.source) + "\"";
            out += ",\"text\":\"" + json_escape(element.text) + "\"}";
        }
        out += "]";
        out += ",\"index\":" + std::to_string(frame.index);
        out += ",\"is_initial\":" + std::string(frame.is_initial ? "true" : "false");
        out += ",\"timestamp_ms\":" + std::to_string(frame.timestamp_ms);
        out += "}";
    }
    out += "]";
    out += ",\"resolution\":[" + std::to_string(schema.width) + "," +
           std::to_string(schema.height) + "]";
    out += ",\"version\":\"" + json_escape(schema.version) + "\"}";
    out += "\n";
    return out;
}

namespace {

ValidationError field_error(const std::string& field, const std::string& what) {
    return ValidationError("schema field '" + field + "': " + what);
}

int require_int(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer()) throw field_error(field, "expected an integer");
    return j.get<int>();
}

std::int64_t require_int64(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer()) throw field_error(field, "expected an integer");
    return j.get<std::int64_t>();
}

double require_score(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw field_error(field, "expected a number");
    double v = j.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw field_error(field, "must be within [0,1]");
    return v;
}

}  // namespace

ScreenSchema parse_schema(std::string_view bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ValidationError("schema: not a JSON object");
    }
    if (!j.contains("version") || !j["version"].is_string()) {
        throw field_error("version", "missing or not a string");
    }
    std::string version = j["version"].get<std::string>();
    if (version != "1") throw VersionError("unknown schema version: " + version);

    ScreenSchema schema;
    schema.version = version;

    if (!j.contains("clip_id") || !j["clip_id"].is_string()) {
        throw field_error("clip_id", "missing or not a string");
    }
    schema.clip_id = j["clip_id"].get<std::string>();

    if (!j.contains("resolution") || !j["resolution"].is_array() ||
        j["resolution"].size() != 2) {
        throw field_error("resolution", "expected [width,height]");
    }
    schema.width = require_int(j["resolution"][0], "resolution[0]");
    schema.height = require_int(j["resolution"][1], "resolution[1]");
    if (schema.width < 1 || schema.height < 1) {
        throw field_error("resolution", "dimensions must be >= 1");
    }

    if (!j.contains("clip_span") || !j["clip_span"].is_array() || j["clip_span"].size() != 2) {
        throw field_error("clip_span", "expected [start_ms,end_ms]");
    }
    schema.start_ms = require_int64(j["clip_span"][0], "clip_span[0]");
    schema.end_ms = require_int64(j["clip_span"][1], "clip_span[1]");
    if (schema.start_ms > schema.end_ms) {
        throw field_error("clip_span", "start must not exceed end");
    }

    if (!j.contains("frames") || !j["frames"].is_array() || j["frames"].empty()) {
        throw field_error("frames", "expected a non-empty array");
    }

    int initial_count = 0;
    int last_index = -1;
    std::int64_t last_ts = 0;
    for (std::size_t fi = 0; fi < j["frames"].size(); ++fi) {
        const auto& fj = j["frames"][fi];
        const std::string where = "frames[" + std::to_string(fi) + "]";
        if (!fj.is_object()) throw field_error(where, "expected an object");

        FrameEntry frame;
        if (!fj.contains("index")) throw field_error(where + ".index", "missing");
        frame.index = require_int(fj["index"], where + ".index");
        if (!fj.contains("timestamp_ms")) throw field_error(where + ".timestamp_ms", "missing");
        frame.timestamp_ms = require_int64(fj["timestamp_ms"], where + ".timestamp_ms");
        if (frame.timestamp_ms < 0) throw field_error(where + ".timestamp_ms", "negative");
        if (!fj.contains("is_initial") || !fj["is_initial"].is_boolean()) {
            throw field_error(where + ".is_initial", "missing or not a boolean");
        }
        frame.is_initial = fj["is_initial"].get<bool>();

        if (frame.is_initial) {
            ++initial_count;
            if (fi != 0) throw field_error(where + ".is_initial", "initial frame must be first");
        } else if (fi == 0) {
            throw field_error("frames[0].is_initial", "first entry must be the initial frame");
        }
        if (fi >= 1) {
            if (frame.index <= last_index) {
                throw field_error(where + ".index", "key frame indices must ascend");
            }
            if (frame.timestamp_ms < last_ts) {
                throw field_error(where + ".timestamp_ms", "timestamps must be non-decreasing");
            }
        }
        last_index = frame.index;
        last_ts = frame.timestamp_ms;

        if (fj.contains("cursor")) {
            const auto& cj = fj["cursor"];
            if (!cj.is_array() || cj.size() != 3) {
                throw field_error(where + ".cursor", "expected [x,y,confidence]");
            }
            CursorEntry cursor;
            cursor.x = require_int(cj[0], where + ".cursor[0]");
            cursor.y = require_int(cj[1], where + ".cursor[1]");
            cursor.confidence = require_score(cj[2], where + ".cursor[2]");
            if (cursor.x < 0 || cursor.x >= schema.width || cursor.y < 0 ||
                cursor.y >= schema.height) {
                throw field_error(where + ".cursor", "position outside resolution");
            }
            frame.cursor = cursor;
        }

        if (!fj.contains("elements") || !fj["elements"].is_array()) {
            throw field_error(where + ".elements", "missing or not an array");
        }
        for (std::size_t ei = 0; ei < fj["elements"].size(); ++ei) {
            const auto& ej = fj["elements"][ei];
            const std::string ewhere = where + ".elements[" + std::to_string(ei) + "]";
            if (!ej.is_object()) throw field_error(ewhere, "expected an object");

            ElementEntry element;
            if (!ej.contains("bbox") || !ej["bbox"].is_array() || ej["bbox"].size() != 4) {
                throw field_error(ewhere + ".bbox", "expected [x,y,w,h]");
            }
            element.bbox.x = require_int(ej["bbox"][0], ewhere + ".bbox[0]");
            element.bbox.y = require_int(ej["bbox"][1], ewhere + ".bbox[1]");
            element.bbox.w = require_int(ej["bbox"][2], ewhere + ".bbox[2]");
            element.bbox.h = require_int(ej["bbox"][3], ewhere + ".bbox[3]");
            if (element.bbox.w < 1 || element.bbox.h < 1 || element.bbox.x < 0 ||
                element.bbox.y < 0 || element.bbox.x + element.bbox.w > schema.width ||
                element.bbox.y + element.bbox.h > schema.height) {
                throw field_error(ewhere + ".bbox", "outside frame bounds");
            }
            if (!ej.contains("text") || !ej["text"].is_string()) {
                throw field_error(ewhere + ".text", "missing or not a string");
            }
            element.text = ej["text"].get<std::string>();
            if (element.text.empty()) throw field_error(ewhere + ".text", "must not be empty");
            if (!ej.contains("confidence")) throw field_error(ewhere + ".confidence", "missing");
            element.confidence = require_score(ej["confidence"], ewhere + ".confidence");
            if (!ej.contains("source") || !ej["source"].is_string()) {
                throw field_error(ewhere + ".source", "missing or not a string");
            }
            std::string source = ej["source"].get<std::string>();
            if (source == "initial_frame") {
                element.source = ElementSource::initial_frame;
            } else if (source == "changed_region") {
                element.source = ElementSource::changed_region;
            } else {
                throw field_error(ewhere + ".source", "unknown source: " + source);
            }

            bool has_item = ej.contains("matched_item");
            bool has_score = ej.contains("match_score");
            if (has_item != has_score) {
                throw field_error(ewhere, "matched_item and match_score must appear together");
            }
            if (has_item) {
                if (!ej["matched_item"].is_string()) {
                    throw field_error(ewhere + ".matched_item", "not a string");
                }
                element.matched_item = ej["matched_item"].get<std::string>();
                double score = require_score(ej["match_score"], ewhere + ".match_score");
                if (score < 0.8) {
                    throw field_error(ewhere + ".match_score", "must be >= 0.8 when present");
                }
                element.match_score = score;
            }
            frame.elements.push_back(std::move(element));
        }
        if (!std::is_sorted(frame.elements.begin(), frame.elements.end(), element_order)) {
            throw field_error(where + ".elements", "must be sorted by (y, x, text)");
        }
        schema.frames.push_back(std::move(frame));
    }
    if (initial_count != 1) {
        throw field_error("frames", "exactly one initial frame required");
    }
    return schema;
}

std::string render_prompt_schema(const ScreenSchema& schema) {
    std::string out;
    out += "resolution=" + std::to_string(schema.width) + "x" + std::to_string(schema.height);
    out += " span=" + std::to_string(schema.start_ms) + ".." + std::to_string(schema.end_ms) +
           "ms\n";
    for (const FrameEntry& frame : schema.frames) {
        out += "t=" + std::to_string(frame.timestamp_ms);
        if (frame.is_initial) out += " initial";
        if (frame.cursor) {
            out += " cursor=(" + std::to_string(frame.cursor->x) + "," +
                   std::to_string(frame.cursor->y) + ")";
        }
        out += "\n";
        for (const ElementEntry& element : frame.elements) {
            out += "  [" + std::to_string(element.bbox.y) + "," +
                   std::to_string(element.bbox.x) + "," + std::to_string(element.bbox.w) +
                   "," + std::to_string(element.bbox.h) + "] \"" + element.text + "\"";
            if (element.matched_item) out += " -> " + *element.matched_item;
            out += "\n";
        }
    }
    return out;
}

}  // namespace sschema
