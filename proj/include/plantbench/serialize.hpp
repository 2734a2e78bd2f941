#pragma once

#include <string>

#include "plantbench/net.hpp"
#include "plantbench/plant.hpp"
#include "plantbench/ticket.hpp"

namespace plantbench {

// JSON snapshot of a network: arch, row-major weight matrices, biases, masks.
std::string net_to_json(const MaskedMLP& net);
MaskedMLP net_from_json(const std::string& json);

// Ticket: arch, task/head tags, (layer,row,col,value) weights and
// (layer,idx,value) biases.
std::string ticket_to_json(const SparseTicket& t);
SparseTicket ticket_from_json(const std::string& json);

// PlantReport: placement arrays, scales, lambda_out, placed positions.
std::string report_to_json(const PlantReport& r);
PlantReport report_from_json(const std::string& json);

std::string masks_to_json(const MaskSet& m);
MaskSet masks_from_json(const std::string& json);

void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

}  // namespace plantbench
