#pragma once

#include <string>
#include <vector>

namespace dyadsync::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN points break the line
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  double width = 640;
  double height = 400;
};

std::string render(const LinePlot& plot);

struct CircularGraph {
  std::string title;
  std::vector<std::string> nodes;
  /// Edges as (i, j, weight); weights scale stroke width.
  struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;
  };
  std::vector<Edge> edges;
  double size = 420;
};

std::string render(const CircularGraph& graph);

}  // namespace dyadsync::svg
