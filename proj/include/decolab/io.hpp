#pragma once

#include "decolab/collapse.hpp"
#include "decolab/frames.hpp"
#include "decolab/localization.hpp"
#include "decolab/scenarios.hpp"
#include "decolab/unravel.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

namespace decolab {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Shortest round-trip decimal form; identical across runs.
std::string format_number(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Columns t, mean_x, mean_p, var_x, var_p, jumped.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);
// Columns x, re, im, prob (physical amplitudes).
void write_wavefunction_csv(const std::filesystem::path& path, const WaveFunction& psi);
// Columns t, w1, jumped.
void write_collapse_path_csv(const std::filesystem::path& path, const CollapsePath& path_data);

// Rejects members of `obj` not named in `allowed`.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);

// Complex entries are [re, im] pairs or plain reals.
ComplexVector vector_from_json(const Json& j, const std::string& what);
ComplexMatrix matrix_from_json(const Json& j, const std::string& what);
Json to_json(const ComplexVector& v);
Json to_json(const ComplexMatrix& m);

// {"H": matrix, "F": [matrix...], "r": matrix}
LindbladModel model_from_json(const Json& j);
Json to_json(const LindbladModel& model);

// {"subsystems": [{"name", "dim"}], "initial": {"amplitudes": vector} | {"product": [vector...]},
//  "events": [{"label", "targets", "frame", "unitary": matrix | {"measure": {"plus", "minus", "record"}}}]}
EventScript script_from_json(const Json& j);

Json to_json(const BranchTree& tree);
Json to_json(const ConsistencyReport& c);
Json to_json(const Assertion& a);
Json to_json(const ScenarioReport& report);

}  // namespace decolab
