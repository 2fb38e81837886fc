#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stagechain::svg {

// One plotted series: a polyline by default, markers when `points` is set.
struct Series {
    std::string label;
    std::vector<double> x, y;  // equal length; non-finite entries break the line
    bool points = false;
};

struct Chart {
    std::string title, x_label, y_label;
    std::vector<Series> series;
    int width = 800, height = 500;
};

// Renders a self-contained SVG document.  Throws svg.EmptyChart when no series
// contributes a finite point.
std::string render(const Chart& chart);

void write_chart(std::ostream& os, const Chart& chart);

} // namespace stagechain::svg
