#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sschema {

// Tool-to-category table for answer validation. The built-in table covers
// the Photoshop toolbox; an override file with the same JSON shape
// ([{"category":...,"tools":[...]}, ...]) swaps in any other application.
class ToolTaxonomy {
public:
    static const ToolTaxonomy& embedded();
    static ToolTaxonomy from_json(std::string_view json_text);

    const std::vector<std::pair<std::string, std::vector<std::string>>>& categories() const {
        return categories_;
    }
    // Flattened tool list in table order.
    const std::vector<std::string>& tools() const { return tools_; }

    // Lookups are case-insensitive and whitespace-collapsed.
    std::optional<std::string> category_of(const std::string& tool) const;
    bool validate(const std::string& category, const std::string& tool) const;

    // match_menu_item against the flattened tool list.
    std::optional<std::pair<std::string, double>> fuzzy_tool(const std::string& text) const;

private:
    std::vector<std::pair<std::string, std::vector<std::string>>> categories_;
    std::vector<std::string> tools_;
    std::map<std::string, std::string> tool_to_category_;  // normalized tool -> category
    std::map<std::string, std::size_t> category_index_;    // normalized category -> index

    void build_lookups();
};

}  // namespace sschema
