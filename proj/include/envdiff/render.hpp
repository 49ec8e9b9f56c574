#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "envdiff/analysis.hpp"
#include "envdiff/experiment.hpp"

namespace envdiff::render {

// Scatter of (k, R), accumulated boxes, max/mean/min envelopes, rnd column,
// and generated/distinct counts per k along the top.
std::string distribution_svg(const experiment::Records& records, const std::string& title = "");

std::string histogram_svg(const analysis::Histogram& h, const std::string& title = "");

struct ResponseRow {
  double theta = 0;
  double raw = 0;
  double normalized = 0;
  bool positive_branch = true;
};

// Reads the response CSV written by the curves module.
std::vector<ResponseRow> read_response_csv(std::istream& in);
std::string response_svg(const std::vector<ResponseRow>& rows, const std::string& title = "");

}  // namespace envdiff::render
