#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "playtrack/appearance.hpp"
#include "playtrack/mot_io.hpp"
#include "playtrack/trainer.hpp"

namespace playtrack {

enum class MotionProfile { kLinear, kCurved, kSprintAndCut };

MotionProfile parse_motion_profile(std::string_view name);
std::string to_string(MotionProfile profile);

/// Synthetic multi-agent scene. Distances are pixels, velocities pixels per frame.
struct Scenario {
    int n_agents = 10;
    double image_width = 1280.0;
    double image_height = 720.0;
    int n_frames = 300;
    double fps = 25.0;
    MotionProfile profile = MotionProfile::kSprintAndCut;
    std::uint64_t seed = 0;

    double max_speed = 8.0;
    double max_accel = 0.6;        ///< sprint-and-cut acceleration magnitude bound
    int segment_min = 10;          ///< frames between acceleration changes
    int segment_max = 30;
    double vertical_scale = 1.0;   ///< damping of vertical motion (depth moves look slower)
    double box_height_far = 60.0;  ///< box height at the top edge
    double box_height_near = 160.0;
    double aspect_min = 0.35;      ///< width / height
    double aspect_max = 0.45;

    /// Probability that an overlap episode between two agents is a real occlusion of the
    /// farther one. During a real occlusion the far agent's coverage lowers its confidence and
    /// embedding quality; at coverage >= 0.5 its detection is dropped or merged into the
    /// occluder's box.
    double occlusion_rate = 0.0;
    double merge_probability = 0.5;  ///< merge instead of drop at heavy coverage
    bool truncate_partial = true;    ///< partially covered boxes shrink to their visible pixels

    double noise_sigma = 0.0;  ///< detector jitter per coordinate
    double miss_rate = 0.0;
    double conf_jitter_scale = 3.0;  ///< conf = 1 - rms_jitter/(scale sigma) - weight * covered
    double conf_occlusion_weight = 0.5;
    double false_positive_rate = 0.0;  ///< expected spurious detections per frame

    double pan_amplitude = 0.0;  ///< camera pan speed amplitude, horizontal
    int pan_period = 200;

    bool embeddings = true;
    int embedding_dim = 128;
    int teams = 2;
    double team_similarity = 0.0;
    SyntheticNoise embedding_noise;

    void validate() const;
};

struct SimulatedSequence {
    SequenceData sequence;  ///< detections (with embeddings) and ground truth
    /// Ground-truth identity of every detection, aligned with sequence.frames (-1 for false positives).
    std::map<int, std::vector<int>> detection_identity;
};

/// Bounding box of the pixels of `far` left visible by `occluder`. A side is cut only when the
/// occluder spans the whole extent of `far` along the other axis; otherwise both extremes stay
/// visible and `far` is returned unchanged, as it is when nothing would remain.
BoundingBox visible_part(const BoundingBox& far, const BoundingBox& occluder);

/// Deterministic in scenario (including the seed).
SimulatedSequence generate(const Scenario& scenario);

/// Sequence directory plus `identities.txt` rows `frame,detection_index,identity`.
void write_simulation(const std::string& dir, const SimulatedSequence& sim);
/// Reads a directory written by write_simulation. Throws DataError when the sidecar is missing.
SimulatedSequence load_simulation(const std::string& dir);

/// Cuts each identity's consecutive detections into tracklets of `length` boxes
/// (inputs = detections, targets = ground truth), normalized by the image size.
std::vector<TrainingTracklet> extract_tracklets(const SimulatedSequence& sim, int length, int stride);

/// Tracklets from `sequences` scenarios with seeds first_seed, first_seed + 1, ...
std::vector<TrainingTracklet> simulate_tracklets(const Scenario& scenario, std::uint64_t first_seed,
                                                 int sequences, int length, int stride);

}  // namespace playtrack
