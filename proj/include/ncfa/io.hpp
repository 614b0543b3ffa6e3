#pragma once

#include <string>

#include "json.hpp"
#include "ncfa/graph.hpp"
#include "ncfa/indep.hpp"
#include "ncfa/synth.hpp"
#include "ncfa/vae.hpp"

namespace ncfa::io {

using json = nlohmann::ordered_json;

// graph schema: UDG {"n", "edges": [[i,j],...]} with i<j in lex order;
// MCM/NCFA {"n", "biadjacency", "multiplicities" (NCFA only)};
// round trips are bit-exact

json udg_to_json(const UndirectedGraph& g);
UndirectedGraph udg_from_json(const json& j);

json mcm_to_json(const MCMGraph& g);
MCMGraph mcm_from_json(const json& j);

json ncfa_to_json(const NCFAGraph& g);
NCFAGraph ncfa_from_json(const json& j);

json ground_truth_to_json(const synth::GroundTruth& gt);
synth::GroundTruth ground_truth_from_json(const json& j);

json model_to_json(const vae::VAEParams& params, const vae::TrainConfig& config);
vae::VAEParams model_from_json(const json& j, vae::TrainConfig* config = nullptr);

/// Canonical serialized form used for every artifact (2-space indent,
/// trailing newline); identical values always produce identical bytes.
std::string canonical_dump(const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

/// Shortest round-trip decimal rendering used in CSV output.
std::string format_double(double v);

indep::SampleMatrix read_csv(const std::string& path, bool header);
void write_csv(const std::string& path, const indep::SampleMatrix& sample);
void write_trace_csv(const std::string& path, const vae::TrainTrace& trace);

}  // namespace ncfa::io
