// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "spk/sweep.hpp"

namespace spk {

// Accuracy vs keep ratio: one polyline per strategy through the seed-averaged acc1 values,
// a marker per vertex, linear axes and a legend. Output is a pure function of the rows.
std::string emit_svg_lines(std::span<const ResultRow> rows);

}  // namespace spk
