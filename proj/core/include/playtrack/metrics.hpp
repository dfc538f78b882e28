#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "playtrack/mot_io.hpp"

namespace playtrack {

inline constexpr std::size_t kHotaAlphaCount = 19;
/// Localization thresholds 0.05, 0.10, ..., 0.95.
std::array<double, kHotaAlphaCount> hota_alphas();

struct EvalReport {
    std::string name;
    long gt_boxes = 0;
    long predicted_boxes = 0;

    // CLEAR
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    double mota = 0.0;

    // Identity
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
    double idf1 = 0.0;

    // HOTA components per alpha
    std::array<double, kHotaAlphaCount> hota_tp{};
    std::array<double, kHotaAlphaCount> hota_fp{};
    std::array<double, kHotaAlphaCount> hota_fn{};
    std::array<double, kHotaAlphaCount> deta_alpha{};
    std::array<double, kHotaAlphaCount> assa_alpha{};
    std::array<double, kHotaAlphaCount> hota_alpha{};
    double deta = 0.0;
    double assa = 0.0;
    double hota = 0.0;
};

/// Scores tracker output against ground truth. Per-frame matching uses IoU with the given
/// threshold for CLEAR and identity metrics; HOTA sweeps the alpha thresholds.
/// Throws std::invalid_argument when the ground truth has no boxes.
EvalReport evaluate(const LabeledFrames& gt, const LabeledFrames& results,
                    double iou_threshold = 0.5, const std::string& name = "sequence");

/// Combines per-sequence reports by summing their counts (AssA weighted by true positives).
EvalReport aggregate(const std::vector<EvalReport>& reports, const std::string& name = "COMBINED");

/// CSV with header; one row per report.
void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports);
/// Fixed-width human-readable table.
void write_report_table(std::ostream& out, const std::vector<EvalReport>& reports);

}  // namespace playtrack
