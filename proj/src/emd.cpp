// Exact earth mover's distance on pixel grids via the transportation
// simplex. Shared mass is cancelled first (optimal under a metric ground
// cost), so only the surplus/deficit cells enter the solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "salkit/metrics.hpp"

namespace salkit {

namespace {

struct Cell {
    double x, y;
    double mass;
};

class TransportSimplex {
public:
    TransportSimplex(std::vector<Cell> sources, std::vector<Cell> sinks)
        : src_(std::move(sources)), dst_(std::move(sinks)),
          S_(static_cast<int>(src_.size())), T_(static_cast<int>(dst_.size())) {}

    double solve() {
        build_initial_basis();
        const int nodes = S_ + T_;
        const long max_pivots = 400L * nodes * nodes + 10000;
        int stalled = 0;
        bool bland = false;
        for (long pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            auto [ei, ej] = find_entering(bland);
            if (ei < 0) break; // optimal
            double theta = apply_pivot(ei, ej);
            if (theta <= kFlowTol) {
                // Degenerate pivots can cycle under the most-negative rule;
                // fall back to Bland's rule once stalling is detected.
                if (++stalled > 2 * nodes + 16) bland = true;
            } else {
                stalled = 0;
            }
        }
        double total = 0.0;
        for (const Arc& a : basis_)
            if (a.alive) total += a.flow * cost(a.s, a.t);
        return total;
    }

private:
    static constexpr double kFlowTol = 1e-15;

    struct Arc {
        int s, t;
        double flow;
        bool alive;
    };

    double cost(int i, int j) const {
        double dx = src_[i].x - dst_[j].x;
        double dy = src_[i].y - dst_[j].y;
        return std::sqrt(dx * dx + dy * dy);
    }

    void build_initial_basis() {
        // Northwest-corner start: S + T - 1 arcs, degenerate zeros allowed.
        int i = 0, j = 0;
        double ra = src_[0].mass, rb = dst_[0].mass;
        while (true) {
            double f = std::max(0.0, std::min(ra, rb));
            basis_.push_back({i, j, f, true});
            ra -= f;
            rb -= f;
            if (i == S_ - 1 && j == T_ - 1) break;
            // Advance past whichever side was exhausted (supply on ties).
            bool advance_source = (j == T_ - 1) || (i < S_ - 1 && ra <= rb);
            if (advance_source) {
                ++i;
                ra = src_[i].mass;
            } else {
                ++j;
                rb = dst_[j].mass;
            }
        }
    }

    void rebuild_adjacency() {
        adj_.assign(S_ + T_, {});
        for (int k = 0; k < static_cast<int>(basis_.size()); ++k) {
            if (!basis_[k].alive) continue;
            adj_[basis_[k].s].push_back(k);
            adj_[S_ + basis_[k].t].push_back(k);
        }
    }

    void compute_potentials() {
        rebuild_adjacency();
        pot_.assign(S_ + T_, 0.0);
        std::vector<char> done(S_ + T_, 0);
        std::vector<int> stack = {0};
        done[0] = 1;
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            for (int k : adj_[node]) {
                const Arc& a = basis_[k];
                int other = (node == a.s) ? S_ + a.t : a.s;
                if (done[other]) continue;
                pot_[other] = cost(a.s, a.t) - pot_[node];
                done[other] = 1;
                stack.push_back(other);
            }
        }
    }

    std::pair<int, int> find_entering(bool bland) const {
        double tol = 1e-12 * (1.0 + cost_scale());
        int bi = -1, bj = -1;
        double best = -tol;
        for (int i = 0; i < S_; ++i) {
            for (int j = 0; j < T_; ++j) {
                double red = cost(i, j) - pot_[i] - pot_[S_ + j];
                if (red < best) {
                    best = red;
                    bi = i;
                    bj = j;
                    if (bland) return {bi, bj};
                }
            }
        }
        return {bi, bj};
    }

    double cost_scale() const {
        double dx = 0.0, dy = 0.0;
        for (const Cell& c : src_) {
            dx = std::max(dx, std::abs(c.x));
            dy = std::max(dy, std::abs(c.y));
        }
        for (const Cell& c : dst_) {
            dx = std::max(dx, std::abs(c.x));
            dy = std::max(dy, std::abs(c.y));
        }
        return dx + dy;
    }

    // Adds arc (ei, ej), shifts flow around the induced tree cycle, and
    // removes one emptied arc. Returns the shifted amount.
    double apply_pivot(int ei, int ej) {
        // Tree path from sink node S_+ej back to source node ei.
        const int start = S_ + ej, goal = ei;
        std::vector<int> via_arc(S_ + T_, -1), prev(S_ + T_, -1);
        std::vector<char> seen(S_ + T_, 0);
        std::vector<int> stack = {start};
        seen[start] = 1;
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            if (node == goal) break;
            for (int k : adj_[node]) {
                const Arc& a = basis_[k];
                int other = (node == a.s) ? S_ + a.t : a.s;
                if (seen[other]) continue;
                seen[other] = 1;
                prev[other] = node;
                via_arc[other] = k;
                stack.push_back(other);
            }
        }

        // Walk goal -> start; arcs alternate -, +, -, ... along the cycle
        // [ei -> ej (entering, +), ej -> ... -> ei (tree path)].
        std::vector<int> path_arcs;
        for (int node = goal; node != start; node = prev[node])
            path_arcs.push_back(via_arc[node]);
        // path_arcs is ordered from ei side back to ej side; reverse so it
        // follows the cycle direction after the entering arc.
        std::reverse(path_arcs.begin(), path_arcs.end());

        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (std::size_t k = 0; k < path_arcs.size(); ++k) {
            if (k % 2 != 0) continue; // minus arcs are at even offsets after entering
            const Arc& a = basis_[path_arcs[k]];
            if (a.flow < theta || (a.flow == theta && path_arcs[k] < leave)) {
                theta = a.flow;
                leave = path_arcs[k];
            }
        }
        theta = std::max(0.0, theta);

        for (std::size_t k = 0; k < path_arcs.size(); ++k) {
            Arc& a = basis_[path_arcs[k]];
            a.flow += (k % 2 == 0) ? -theta : theta;
            a.flow = std::max(0.0, a.flow);
        }
        basis_[leave].alive = false;
        basis_.push_back({ei, ej, theta, true});
        compact();
        return theta;
    }

    void compact() {
        std::vector<Arc> next;
        next.reserve(S_ + T_);
        for (const Arc& a : basis_)
            if (a.alive) next.push_back(a);
        basis_ = std::move(next);
    }

    std::vector<Cell> src_, dst_;
    int S_, T_;
    std::vector<Arc> basis_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> pot_;
};

} // namespace

double emd(const SaliencyMap& pred, const SaliencyMap& gt) {
    if (!pred.same_shape(gt))
        throw Error(ErrorKind::ShapeMismatch, "emd: map shapes differ");
    if (pred.state() != MapState::Distribution || gt.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState, "emd requires Distribution maps");
    if (pred.size() > kEmdMaxCells)
        throw Error(ErrorKind::GridTooLarge,
                    "emd supports at most " + std::to_string(kEmdMaxCells) +
                        " cells; downsample first");

    std::vector<Cell> sources, sinks;
    auto p = pred.values();
    auto q = gt.values();
    const int w = pred.width();
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - q[i];
        double x = static_cast<double>(i % w);
        double y = static_cast<double>(i / w);
        if (d > 0.0)
            sources.push_back({x, y, d});
        else if (d < 0.0)
            sinks.push_back({x, y, -d});
    }
    if (sources.empty() || sinks.empty()) return 0.0;

    double sa = 0.0, sb = 0.0;
    for (const Cell& c : sources) sa += c.mass;
    for (const Cell& c : sinks) sb += c.mass;
    if (sa <= 1e-15 || sb <= 1e-15) return 0.0;
    for (Cell& c : sinks) c.mass *= sa / sb; // rebalance fp drift

    return TransportSimplex(std::move(sources), std::move(sinks)).solve();
}

} // namespace salkit
