#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "germflow/flow.hpp"
#include "germflow/linearize.hpp"
#include "germflow/series.hpp"

namespace germflow {

// Deterministic output forms. Text for exact values is grammar-compatible:
// rendering a germ and parsing the text back reproduces the germ (value
// equality). Approximate values render as decimal pairs for reading only.
// JSON objects use nlohmann's order-preserving map so field order is stable.

using Json = nlohmann::ordered_json;

// -- text ------------------------------------------------------------------

std::string render_coeff(const Coeff& c);
std::string render_series(const FormalSeries& s,
                          const std::vector<std::string>& vars);
// one component bare, several as a tuple
std::string render_components(const std::vector<FormalSeries>& comps,
                              const std::vector<std::string>& vars);
std::string render_germ(const GermMap& g, const std::vector<std::string>& vars);
std::string render_field(const VectorFieldGerm& v,
                         const std::vector<std::string>& vars);
std::string render_certificate(const ObstructionCertificate& c,
                               const std::vector<std::string>& vars);
std::string render_witnesses(const std::vector<ResonanceWitness>& w);
std::string render_matrix(const SquareMatrix& m);
std::string render_flow(const FlowFamily& F,
                        const std::vector<std::string>& vars);

// -- json ------------------------------------------------------------------

Json coeff_json(const Coeff& c);
Json series_json(const std::vector<FormalSeries>& comps, unsigned order,
                 const std::vector<std::string>& vars);
Json germ_json(const GermMap& g, const std::vector<std::string>& vars);
Json field_json(const VectorFieldGerm& v, const std::vector<std::string>& vars);
Json certificate_json(const ObstructionCertificate& c);
Json witnesses_json(const std::vector<ResonanceWitness>& w);
Json matrix_json(const SquareMatrix& m);
Json flow_json(const FlowFamily& F, const std::vector<std::string>& vars);

}  // namespace germflow
