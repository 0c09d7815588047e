#include "sschema/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include "sschema/errors.hpp"
#include "sschema/ocr.hpp"

namespace sschema {

namespace {

// Tool table, one category per entry.
constexpr const char* kEmbeddedTable = R"JSON([
{"category":"Move","tools":["Move Tool","Artboard Tool"]},
{"category":"Marquee","tools":["Rectangular Marquee Tool","Elliptical Marquee Tool","Single Row Marquee Tool","Single Column Marquee Tool"]},
{"category":"Lasso","tools":["Lasso Tool","Polygonal Lasso Tool","Magnetic Lasso Tool"]},
{"category":"Object Selection","tools":["Object Selection Tool","Quick Selection Tool","Magic Wand Tool"]},
{"category":"Cropping","tools":["Crop Tool","Perspective Crop Tool","Slice Tool","Slice Select Tool"]},
{"category":"Framing","tools":["Frame Tool"]},
{"category":"Eyedrop","tools":["Eyedropper Tool","Color Sampler Tool","Ruler Tool","Note Tool","Count Tool"]},
{"category":"Repair","tools":["Spot Healing Brush Tool","Remove Tool","Healing Brush Tool","Patch Tool","Content-Aware Move Tool","Red Eye Tool"]},
{"category":"Pen","tools":["Brush Tool","Pencil Tool","Color Replacement Tool","Mixer Brush Tool"]},
{"category":"Stamp","tools":["Clone Stamp Tool","Pattern Stamp Tool"]},
{"category":"History Brush","tools":["History Brush Tool","Art History Brush Tool"]},
{"category":"Eraser","tools":["Eraser Tool","Background Eraser Tool","Magic Eraser Tool"]},
{"category":"Paint","tools":["Gradient Tool","Paint Bucket Tool"]},
{"category":"Blur","tools":["Blur Tool","Sharpen Tool","Smudge Tool"]},
{"category":"Anchor","tools":["Pen Tool","Freeform Pen Tool","Curvature Pen Tool","Add Anchor Point Tool","Delete Anchor Point Tool","Convert Point Tool"]},
{"category":"Type","tools":["Horizontal Type Tool","Vertical Type Tool","Vertical Type Mask Tool","Horizontal Type Mask Tool"]},
{"category":"Shapes","tools":["Rectangle Tool","Ellipse Tool","Triangle Tool","Polygon Tool","Line Tool","Custom Shape Tool"]},
{"category":"Selection","tools":["Path Selection Tool","Direct Selection Tool"]},
{"category":"Drag","tools":["Hand Tool","Rotate Wheel Tool"]}
])JSON";

}  // namespace

const ToolTaxonomy& ToolTaxonomy::embedded() {
    static const ToolTaxonomy instance = from_json(kEmbeddedTable);
    return instance;
}

ToolTaxonomy ToolTaxonomy::from_json(std::string_view json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw ValidationError("taxonomy: expected a JSON array of categories");
    }
    ToolTaxonomy t;
    for (const auto& entry : j) {
        if (!entry.is_object() || !entry.contains("category") || !entry.contains("tools") ||
            !entry["category"].is_string() || !entry["tools"].is_array()) {
            throw ValidationError("taxonomy: each entry needs category and tools");
        }
        std::vector<std::string> tools;
        for (const auto& tool : entry["tools"]) {
            if (!tool.is_string()) throw ValidationError("taxonomy: tool names must be strings");
            tools.push_back(tool.get<std::string>());
        }
        t.categories_.emplace_back(entry["category"].get<std::string>(), std::move(tools));
    }
    t.build_lookups();
    return t;
}

void ToolTaxonomy::build_lookups() {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        const auto& [category, tools] = categories_[i];
        std::string ckey = normalize_menu_text(category);
        if (category_index_.count(ckey)) {
            throw ValidationError("taxonomy: duplicate category " + category);
        }
        category_index_[ckey] = i;
        for (const auto& tool : tools) {
            std::string tkey = normalize_menu_text(tool);
            if (tool_to_category_.count(tkey)) {
                throw ValidationError("taxonomy: tool in more than one category: " + tool);
            }
            tool_to_category_[tkey] = category;
            tools_.push_back(tool);
        }
    }
}

std::optional<std::string> ToolTaxonomy::category_of(const std::string& tool) const {
    auto it = tool_to_category_.find(normalize_menu_text(tool));
    if (it == tool_to_category_.end()) return std::nullopt;
    return it->second;
}

bool ToolTaxonomy::validate(const std::string& category, const std::string& tool) const {
    auto cat = category_of(tool);
    if (!cat) return false;
    return normalize_menu_text(*cat) == normalize_menu_text(category);
}

std::optional<std::pair<std::string, double>> ToolTaxonomy::fuzzy_tool(
    const std::string& text) const {
    return match_menu_item(text, tools_);
}

}  // namespace sschema
