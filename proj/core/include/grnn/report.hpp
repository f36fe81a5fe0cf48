#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "grnn/edge_stability.hpp"
#include "grnn/lyapunov.hpp"
#include "grnn/network.hpp"
#include "grnn/perturb.hpp"
#include "grnn/search.hpp"
#include "grnn/synth.hpp"
#include "grnn/tasks.hpp"

namespace grnn {

// Every emitter is deterministic: fixed field order, sorted keys, and float
// text that parses back to the identical bits. Same inputs, same bytes.

std::string match_set_json(const MatchSet& ms);
std::string match_counts_json(std::span<const MatchCount> counts);
std::string task_spec_json(const TaskSpec& task);
std::string subgrnn_json(const SubGRNN& sub);
std::string reliability_report_json(const ReliabilityReport& rep);
// gene,alpha,centrality,r2_mean,hamming,criticality rows; fields that do not
// apply to the task kind stay empty
std::string reliability_csv(const ReliabilityReport& rep);
std::string sweep_json(std::span<const SweepPoint> points, const std::string& metric_name);
std::string sweep_csv(std::span<const SweepPoint> points, const std::string& metric_name);
std::string stability_report_json(const StabilityReport& rep);
std::string overlap_report_json(const OverlapReport& rep);
std::string stability_profile_json(const StabilityProfile& prof, const TrajectoryParams& params);
// columns s,alpha,sigma,V,dV_ds
std::string trajectory_csv(const LyapunovTrajectory& traj);
std::string ground_truth_json(const GroundTruth& truth);

// Every artifact directory gets one of these, describing the run that made it.
struct RunManifest {
    std::string command;                                // subcommand and arguments
    std::map<std::string, std::string> config;          // resolved option -> value
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;   // input path -> digest of bytes read
    std::string version;
    std::string wall_time_utc;  // informational; the only field that varies between
                                // reruns, so determinism checks mask it
};
std::string run_manifest_json(const RunManifest& m);

// 64-bit FNV-1a of the exact bytes, as 16 hex digits.
std::string bytes_digest_hex(std::string_view bytes);
std::string file_digest_hex(const std::string& path);  // IoError

std::string read_text_file(const std::string& path);                   // IoError
void write_text_file(const std::string& path, std::string_view text);  // IoError

std::string utc_timestamp();

}  // namespace grnn
