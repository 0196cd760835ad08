// serialize.hpp - JSON/CSV adapters for the domain types. All doubles print
// with 17 significant digits so files round-trip losslessly.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gaplab/continuum.hpp"
#include "gaplab/gap.hpp"
#include "gaplab/thin.hpp"
#include "gaplab/words.hpp"

namespace gaplab {

using Json = nlohmann::json;

std::string fmt_double(double x);

Json word_to_json(const Word& w);
Word word_from_json(const Json& j);

Json bandset_to_json(const BandSet& b);
BandSet bandset_from_json(const Json& j);

std::string bands_to_csv(const BandSet& b);
BandSet bands_from_csv(const std::string& text);

Json certificate_to_json(const GapCertificate& c);

Json cover_to_json(const GapCover& c);

Json thin_traces_to_json(const std::vector<ThinTrace>& traces);
std::string thin_traces_to_csv(const std::vector<ThinTrace>& traces);
// rows carry (N, u, lambda, measure); per-N fields are regrouped on load
std::vector<ThinTrace> thin_traces_from_csv(const std::string& text);

Json stages_to_json(const std::vector<StageState>& states);
std::vector<StageState> stages_from_json(const Json& j);

Json continuum_word_to_json(const ContinuumWord& w);
ContinuumWord continuum_word_from_json(const Json& j);

}  // namespace gaplab
