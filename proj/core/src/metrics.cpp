#include "playtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "playtrack/assignment.hpp"

namespace playtrack {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Maximum-weight matching (not maximum cardinality): every pair is admissible, pairs with
/// non-positive weight are dropped afterwards.
std::vector<std::pair<std::size_t, std::size_t>> max_weight_matching(const CostMatrix& weights) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (weights.empty()) return out;
    CostMatrix cost(weights.rows(), weights.cols());
    for (std::size_t r = 0; r < weights.rows(); ++r) {
        for (std::size_t c = 0; c < weights.cols(); ++c) cost.at(r, c) = -weights.at(r, c);
    }
    for (const auto& m : solve_assignment(cost).matches) {
        if (weights.at(m.first, m.second) > kEps) out.push_back(m);
    }
    return out;
}

/// Dense id indexing so per-identity counts live in flat tables.
struct IdIndex {
    std::map<int, std::size_t> index;
    std::size_t of(int id) {
        const auto [it, inserted] = index.try_emplace(id, index.size());
        return it->second;
    }
    [[nodiscard]] std::size_t size() const { return index.size(); }
};

struct FrameView {
    std::vector<std::size_t> gt;
    std::vector<std::size_t> tr;
    std::vector<double> iou;  // gt.size() x tr.size()
    [[nodiscard]] double sim(std::size_t g, std::size_t t) const { return iou[g * tr.size() + t]; }
};

double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }

void finish_hota(EvalReport& r) {
    double deta = 0.0, assa = 0.0, hota = 0.0;
    for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
        r.deta_alpha[a] = r.hota_tp[a] / std::max(1.0, r.hota_tp[a] + r.hota_fn[a] + r.hota_fp[a]);
        r.hota_alpha[a] = std::sqrt(r.deta_alpha[a] * r.assa_alpha[a]);
        deta += r.deta_alpha[a];
        assa += r.assa_alpha[a];
        hota += r.hota_alpha[a];
    }
    r.deta = deta / kHotaAlphaCount;
    r.assa = assa / kHotaAlphaCount;
    r.hota = hota / kHotaAlphaCount;
}

void finish_counts(EvalReport& r) {
    r.mota = r.gt_boxes > 0 ? 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / r.gt_boxes : 0.0;
    r.idf1 = safe_div(2.0 * r.idtp, static_cast<double>(r.gt_boxes + r.predicted_boxes));
}

}  // namespace

std::array<double, kHotaAlphaCount> hota_alphas() {
    std::array<double, kHotaAlphaCount> a{};
    for (std::size_t i = 0; i < kHotaAlphaCount; ++i) a[i] = 0.05 * static_cast<double>(i + 1);
    return a;
}

EvalReport evaluate(const LabeledFrames& gt, const LabeledFrames& results, double iou_threshold,
                    const std::string& name) {
    EvalReport r;
    r.name = name;
    IdIndex gt_ids, tr_ids;
    std::map<int, FrameView> frames;
    for (const auto& [frame, rows] : gt) {
        for (const auto& g : rows) frames[frame].gt.push_back(gt_ids.of(g.id));
        r.gt_boxes += static_cast<long>(rows.size());
    }
    if (r.gt_boxes == 0) throw std::invalid_argument("ground truth is empty");
    for (const auto& [frame, rows] : results) {
        for (const auto& t : rows) frames[frame].tr.push_back(tr_ids.of(t.id));
        r.predicted_boxes += static_cast<long>(rows.size());
    }
    const std::size_t ng = gt_ids.size(), nt = tr_ids.size();

    for (auto& [frame, view] : frames) {
        static const std::vector<LabeledBox> none;
        const auto g_it = gt.find(frame);
        const auto t_it = results.find(frame);
        const auto& g_rows = g_it == gt.end() ? none : g_it->second;
        const auto& t_rows = t_it == results.end() ? none : t_it->second;
        view.iou.resize(g_rows.size() * t_rows.size());
        for (std::size_t i = 0; i < g_rows.size(); ++i) {
            for (std::size_t j = 0; j < t_rows.size(); ++j) {
                view.iou[i * t_rows.size() + j] = iou(g_rows[i].box, t_rows[j].box);
            }
        }
    }

    // CLEAR: per-frame matching that prefers continuing the previous frame's pairs.
    {
        constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
        std::vector<std::size_t> last_match(ng, kNone), prev_step(ng, kNone);
        for (const auto& [frame, v] : frames) {
            CostMatrix score(v.gt.size(), v.tr.size());
            for (std::size_t i = 0; i < v.gt.size(); ++i) {
                for (std::size_t j = 0; j < v.tr.size(); ++j) {
                    const double s = v.sim(i, j);
                    if (s < iou_threshold - kEps) continue;
                    score.at(i, j) = s + (prev_step[v.gt[i]] == v.tr[j] ? 1000.0 : 0.0);
                }
            }
            const auto matches = max_weight_matching(score);
            std::fill(prev_step.begin(), prev_step.end(), kNone);
            for (const auto& [i, j] : matches) {
                const std::size_t g = v.gt[i], t = v.tr[j];
                if (last_match[g] != kNone && last_match[g] != t) ++r.idsw;
                last_match[g] = t;
                prev_step[g] = t;
            }
            r.tp += static_cast<long>(matches.size());
            r.fn += static_cast<long>(v.gt.size() - matches.size());
            r.fp += static_cast<long>(v.tr.size() - matches.size());
        }
    }

    // Identity: global one-to-one id mapping maximizing the frames matched above threshold.
    {
        CostMatrix overlap(ng, nt);
        for (const auto& [frame, v] : frames) {
            for (std::size_t i = 0; i < v.gt.size(); ++i) {
                for (std::size_t j = 0; j < v.tr.size(); ++j) {
                    if (v.sim(i, j) >= iou_threshold) overlap.at(v.gt[i], v.tr[j]) += 1.0;
                }
            }
        }
        for (const auto& [g, t] : max_weight_matching(overlap)) {
            r.idtp += std::lround(overlap.at(g, t));
        }
        r.idfn = r.gt_boxes - r.idtp;
        r.idfp = r.predicted_boxes - r.idtp;
    }

    // HOTA
    {
        std::vector<double> potential(ng * nt, 0.0), gt_count(ng, 0.0), tr_count(nt, 0.0);
        for (const auto& [frame, v] : frames) {
            const std::size_t G = v.gt.size(), T = v.tr.size();
            std::vector<double> row_sum(G, 0.0), col_sum(T, 0.0);
            for (std::size_t i = 0; i < G; ++i) {
                for (std::size_t j = 0; j < T; ++j) {
                    row_sum[i] += v.sim(i, j);
                    col_sum[j] += v.sim(i, j);
                }
            }
            for (std::size_t i = 0; i < G; ++i) {
                for (std::size_t j = 0; j < T; ++j) {
                    const double denom = row_sum[i] + col_sum[j] - v.sim(i, j);
                    if (denom > kEps) potential[v.gt[i] * nt + v.tr[j]] += v.sim(i, j) / denom;
                }
            }
            for (std::size_t g : v.gt) gt_count[g] += 1.0;
            for (std::size_t t : v.tr) tr_count[t] += 1.0;
        }
        std::vector<double> alignment(ng * nt, 0.0);
        for (std::size_t g = 0; g < ng; ++g) {
            for (std::size_t t = 0; t < nt; ++t) {
                const double p = potential[g * nt + t];
                alignment[g * nt + t] = safe_div(p, gt_count[g] + tr_count[t] - p);
            }
        }
        const auto alphas = hota_alphas();
        std::vector<std::vector<double>> matches(kHotaAlphaCount, std::vector<double>(ng * nt, 0.0));
        for (const auto& [frame, v] : frames) {
            const std::size_t G = v.gt.size(), T = v.tr.size();
            CostMatrix score(G, T);
            for (std::size_t i = 0; i < G; ++i) {
                for (std::size_t j = 0; j < T; ++j) {
                    score.at(i, j) = alignment[v.gt[i] * nt + v.tr[j]] * v.sim(i, j);
                }
            }
            // Pairs of zero score still count at the lowest thresholds when their IoU qualifies,
            // so the matching keeps every pair the solver assigns.
            std::vector<std::pair<std::size_t, std::size_t>> assigned;
            if (!score.empty()) {
                CostMatrix cost(G, T);
                for (std::size_t i = 0; i < G; ++i) {
                    for (std::size_t j = 0; j < T; ++j) cost.at(i, j) = -score.at(i, j);
                }
                assigned = solve_assignment(cost).matches;
            }
            for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
                double tp = 0.0;
                for (const auto& [i, j] : assigned) {
                    if (v.sim(i, j) >= alphas[a] - kEps) {
                        tp += 1.0;
                        matches[a][v.gt[i] * nt + v.tr[j]] += 1.0;
                    }
                }
                r.hota_tp[a] += tp;
                r.hota_fn[a] += static_cast<double>(G) - tp;
                r.hota_fp[a] += static_cast<double>(T) - tp;
            }
        }
        for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
            double weighted = 0.0;
            for (std::size_t g = 0; g < ng; ++g) {
                for (std::size_t t = 0; t < nt; ++t) {
                    const double m = matches[a][g * nt + t];
                    if (m <= 0.0) continue;
                    weighted += m * m / std::max(1.0, gt_count[g] + tr_count[t] - m);
                }
            }
            r.assa_alpha[a] = weighted / std::max(1.0, r.hota_tp[a]);
        }
    }

    finish_counts(r);
    finish_hota(r);
    return r;
}

EvalReport aggregate(const std::vector<EvalReport>& reports, const std::string& name) {
    EvalReport r;
    r.name = name;
    std::array<double, kHotaAlphaCount> assa_weighted{};
    for (const auto& s : reports) {
        r.gt_boxes += s.gt_boxes;
        r.predicted_boxes += s.predicted_boxes;
        r.tp += s.tp;
        r.fp += s.fp;
        r.fn += s.fn;
        r.idsw += s.idsw;
        r.idtp += s.idtp;
        r.idfp += s.idfp;
        r.idfn += s.idfn;
        for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
            r.hota_tp[a] += s.hota_tp[a];
            r.hota_fp[a] += s.hota_fp[a];
            r.hota_fn[a] += s.hota_fn[a];
            assa_weighted[a] += s.assa_alpha[a] * s.hota_tp[a];
        }
    }
    for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
        r.assa_alpha[a] = assa_weighted[a] / std::max(1.0, r.hota_tp[a]);
    }
    finish_counts(r);
    finish_hota(r);
    return r;
}

void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
    out << "name,HOTA,DetA,AssA,MOTA,IDF1,IDSW,TP,FP,FN,IDTP,IDFP,IDFN,GT,PRED\n";
    char buf[256];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%ld,%ld,%ld,%ld,%ld,%ld,%ld,%ld,%ld",
                      r.hota, r.deta, r.assa, r.mota, r.idf1, r.idsw, r.tp, r.fp, r.fn, r.idtp,
                      r.idfp, r.idfn, r.gt_boxes, r.predicted_boxes);
        out << r.name << ',' << buf << '\n';
    }
}

void write_report_table(std::ostream& out, const std::vector<EvalReport>& reports) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-24s %7s %7s %7s %7s %7s %6s %7s %7s\n", "sequence", "HOTA",
                  "DetA", "AssA", "MOTA", "IDF1", "IDSW", "FP", "FN");
    out << buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-24s %7.2f %7.2f %7.2f %7.2f %7.2f %6ld %7ld %7ld\n",
                      r.name.substr(0, 24).c_str(), 100 * r.hota, 100 * r.deta, 100 * r.assa,
                      100 * r.mota, 100 * r.idf1, r.idsw, r.fp, r.fn);
        out << buf;
    }
}

}  // namespace playtrack
