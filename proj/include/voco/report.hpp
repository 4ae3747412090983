#pragma once

#include <string>
#include <vector>

namespace voco {

// Minimal SVG charts for run summaries; no external plotting dependency.
void svg_line_chart(const std::string& path, const std::string& title,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series);

void svg_bar_chart(const std::string& path, const std::string& title,
                   const std::vector<std::string>& labels, const std::vector<double>& values);

void svg_histogram(const std::string& path, const std::string& title,
                   const std::vector<double>& values, int bins);

} // namespace voco
