#pragma once

#include <string>

#include <json.hpp>

#include "ergolab/conditions.hpp"
#include "ergolab/cylinders.hpp"
#include "ergolab/ergodicity.hpp"
#include "ergolab/expansion.hpp"
#include "ergolab/irreducibility.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

using Json = nlohmann::ordered_json;

// Family files keep full double precision so that a load-save-load cycle is
// exact; reports are quantized to 15 significant digits before writing.
Json family_to_json(const MapFamily& family);
MapFamily family_from_json(const Json& doc);

// Builder dispatch from a config object: {"builder": "expanding", "space":
// "torus1", "depth": 1}, {"builder": "mostly-expanding", "beta": 0.5},
// {"builder": "perturbed-doubling", "amplitude": 0.01}, the named controls,
// or {"file": "family.json"}.
MapFamily family_from_config(const Json& config);

void quantize_floats(Json& doc);  // 15 significant digits, in place

std::string dump_report(Json doc);  // quantized, indent 2, newline-terminated
void write_text(const std::string& path, const std::string& content);
Json read_json_file(const std::string& path);

Json tagged_to_json(const TaggedValue& v);
Json constants_to_json(const ConstantsSheet& sheet);
Json partition_report_to_json(const PartitionReport& rep);
Json markov_to_json(const MarkovReport& rep);
Json sigma_to_json(const SigmaReport& rep);
Json orbit_to_json(const OrbitRecord& rec, std::size_t max_points = 10000);
Json hyperbolic_times_to_json(const HyperbolicTimeSet& times, std::size_t max_times = 10000);
Json cylinder_to_json(const Cylinder& cyl, std::size_t max_samples = 100);
Json diameter_decay_to_json(const DiameterDecayReport& rep);
Json measure_ratio_to_json(const MeasureRatioReport& rep);
Json dynamical_ball_to_json(const DynamicalBallReport& rep);
Json transitivity_to_json(const TransitivityMatrix& mat);
Json weak_cycle_to_json(const WeakCycleReport& rep);
Json contractivity_to_json(const ContractivityReport& rep);
Json ergodicity_to_json(const ErgodicityReport& rep);
Json probe_to_json(const InvariantProbeReport& rep);
Json equidistribution_to_json(const EquidistributionReport& rep);

}  // namespace ergolab
