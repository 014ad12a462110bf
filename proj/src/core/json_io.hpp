#pragma once

#include <string>

#include <json.hpp>

#include "core/clustering.hpp"
#include "core/gpd.hpp"
#include "core/matrix.hpp"
#include "core/max_linear.hpp"
#include "core/oracle.hpp"
#include "core/tpdm.hpp"

namespace evt {

using Json = nlohmann::json;

// Matrices travel as {"rows": r, "cols": c, "data": [row-major]}.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// Models as {"alpha": a, "A": [[row], ...]}; regions as
// {"beta": [1-based indices], "u": [...], "l": [...] or null}.
Json model_to_json(const MaxLinearModel& model);
MaxLinearModel model_from_json(const Json& j);

Json region_to_json(const FailureRegion& region, std::size_t d);
FailureRegion region_from_json(const Json& j, std::size_t d);

Json mc_estimate_to_json(const McEstimate& est);
Json posterior_to_json(const PosteriorSamples& samples);
Json bias_study_to_json(const BiasStudyResult& study);
BiasStudyResult bias_study_from_json(const Json& j);
Json partition_to_json(const ClusterPartition& partition);

// (variable, cluster) pairs, 1-based, one per line.
std::string partition_to_csv(const ClusterPartition& partition);

} // namespace evt
