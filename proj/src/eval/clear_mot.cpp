#include "tripletrack/eval/clear_mot.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "tripletrack/assoc/hungarian.hpp"
#include "tripletrack/io/numbers.hpp"

namespace tripletrack::eval {

namespace {

using FrameRows = std::map<int, std::vector<const BoxRow*>>;

FrameRows by_frame(std::span<const BoxRow> rows, const char* what) {
    FrameRows out;
    for (const auto& r : rows) out[r.frame].push_back(&r);
    for (auto& [frame, list] : out) {
        std::sort(list.begin(), list.end(), [](const BoxRow* a, const BoxRow* b) { return a->id < b->id; });
        for (std::size_t k = 1; k < list.size(); ++k) {
            if (list[k]->id == list[k - 1]->id) {
                throw std::invalid_argument(std::string("evaluate: ") + what + " id " + std::to_string(list[k]->id) +
                                            " appears twice in frame " + std::to_string(frame));
            }
        }
    }
    return out;
}

struct GtState {
    int frames = 0;
    int matched = 0;
    int last_hypothesis = -1;
    bool tracked_before = false;
    bool lost = false;
};

std::vector<std::pair<std::string, std::string>> report_rows(const MotReport& r) {
    auto f = [](double v) { return io::format_double(v); };
    return {
        {"MOTA", f(r.mota)},
        {"MOTP", f(r.motp)},
        {"MT", f(r.mostly_tracked)},
        {"ML", f(r.mostly_lost)},
        {"FP", std::to_string(r.false_positives)},
        {"FN", std::to_string(r.misses)},
        {"IDS", std::to_string(r.id_switches)},
        {"FM", std::to_string(r.fragmentations)},
        {"matches", std::to_string(r.matches)},
        {"gt_boxes", std::to_string(r.gt_boxes)},
        {"hypothesis_boxes", std::to_string(r.hypothesis_boxes)},
        {"gt_tracks", std::to_string(r.gt_tracks)},
    };
}

}  // namespace

MotReport evaluate(std::span<const BoxRow> ground_truth, std::span<const BoxRow> hypotheses, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument("evaluate: IoU threshold must lie in (0, 1)");
    }
    const FrameRows gt = by_frame(ground_truth, "ground-truth");
    const FrameRows hyp = by_frame(hypotheses, "hypothesis");
    std::set<int> frames;
    for (const auto& [f, _] : gt) frames.insert(f);
    for (const auto& [f, _] : hyp) frames.insert(f);

    MotReport report;
    std::map<int, GtState> states;
    std::map<int, int> previous;  // gt id -> hypothesis id matched in the previous processed frame
    double iou_sum = 0.0;
    static const std::vector<const BoxRow*> kNone;

    for (int frame : frames) {
        const auto git = gt.find(frame);
        const auto hit = hyp.find(frame);
        const auto& g = git == gt.end() ? kNone : git->second;
        const auto& h = hit == hyp.end() ? kNone : hit->second;
        FrameEvents ev;
        ev.frame = frame;

        std::vector<int> g_match(g.size(), -1);
        std::vector<char> h_used(h.size(), 0);
        std::vector<double> g_iou(g.size(), 0.0);
        std::map<int, std::size_t> h_index;
        for (std::size_t j = 0; j < h.size(); ++j) h_index[h[j]->id] = j;

        for (std::size_t i = 0; i < g.size(); ++i) {
            auto p = previous.find(g[i]->id);
            if (p == previous.end()) continue;
            auto hj = h_index.find(p->second);
            if (hj == h_index.end() || h_used[hj->second]) continue;
            const double v = iou(g[i]->box, h[hj->second]->box);
            if (v >= iou_threshold) {
                g_match[i] = static_cast<int>(hj->second);
                g_iou[i] = v;
                h_used[hj->second] = 1;
            }
        }

        std::vector<std::size_t> free_g, free_h;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g_match[i] < 0) free_g.push_back(i);
        }
        for (std::size_t j = 0; j < h.size(); ++j) {
            if (!h_used[j]) free_h.push_back(j);
        }
        if (!free_g.empty() && !free_h.empty()) {
            assoc::CostMatrix costs(free_g.size(), free_h.size());
            for (std::size_t a = 0; a < free_g.size(); ++a) {
                for (std::size_t b = 0; b < free_h.size(); ++b) {
                    const double v = iou(g[free_g[a]]->box, h[free_h[b]]->box);
                    if (v >= iou_threshold) {
                        costs.set(a, b, 1.0 - v);
                    } else {
                        costs.forbid(a, b);
                    }
                }
            }
            for (auto [a, b] : assoc::hungarian(costs).matches) {
                g_match[free_g[a]] = static_cast<int>(free_h[b]);
                g_iou[free_g[a]] = 1.0 - costs(a, b);
                h_used[free_h[b]] = 1;
            }
        }

        std::map<int, int> current;
        for (std::size_t i = 0; i < g.size(); ++i) {
            GtState& s = states[g[i]->id];
            ++s.frames;
            if (g_match[i] < 0) {
                ++ev.misses;
                if (s.tracked_before) s.lost = true;
                continue;
            }
            const int hyp_id = h[static_cast<std::size_t>(g_match[i])]->id;
            ++ev.matches;
            ++s.matched;
            iou_sum += g_iou[i];
            if (s.last_hypothesis >= 0 && s.last_hypothesis != hyp_id) ++ev.switches;
            if (s.lost) ++report.fragmentations;
            s.lost = false;
            s.tracked_before = true;
            s.last_hypothesis = hyp_id;
            current[g[i]->id] = hyp_id;
        }
        ev.false_positives = static_cast<int>(h.size()) - ev.matches;
        previous = std::move(current);

        report.matches += ev.matches;
        report.misses += ev.misses;
        report.false_positives += ev.false_positives;
        report.id_switches += ev.switches;
        report.gt_boxes += static_cast<long>(g.size());
        report.hypothesis_boxes += static_cast<long>(h.size());
        report.frames.push_back(ev);
    }

    const long errors = report.false_positives + report.misses + report.id_switches;
    report.mota = report.gt_boxes > 0 ? 1.0 - static_cast<double>(errors) / static_cast<double>(report.gt_boxes)
                                      : 1.0 - static_cast<double>(errors);
    report.motp = report.matches > 0 ? iou_sum / static_cast<double>(report.matches) : 0.0;
    report.gt_tracks = static_cast<int>(states.size());
    int mt = 0, ml = 0;
    for (const auto& [id, s] : states) {
        const double ratio = static_cast<double>(s.matched) / static_cast<double>(s.frames);
        if (ratio >= kMostlyTracked) ++mt;
        if (ratio < kMostlyLost) ++ml;
    }
    if (report.gt_tracks > 0) {
        report.mostly_tracked = static_cast<double>(mt) / report.gt_tracks;
        report.mostly_lost = static_cast<double>(ml) / report.gt_tracks;
    }
    return report;
}

std::string report_table(const MotReport& report) {
    const auto rows = report_rows(report);
    std::size_t width = 0;
    for (const auto& [k, v] : rows) width = std::max(width, k.size());
    std::ostringstream out;
    out << "# CLEAR-MOT (MOTP = mean IoU of matches)\n";
    for (const auto& [k, v] : rows) out << k << std::string(width - k.size() + 2, ' ') << v << '\n';
    return out.str();
}

std::string report_csv(const MotReport& report) {
    std::ostringstream out;
    out << "metric,value\n";
    for (const auto& [k, v] : report_rows(report)) out << k << ',' << v << '\n';
    return out.str();
}

}  // namespace tripletrack::eval
