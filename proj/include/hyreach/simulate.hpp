#ifndef HYREACH_SIMULATE_HPP
#define HYREACH_SIMULATE_HPP

#include "arc.hpp"
#include "cones.hpp"
#include "system.hpp"

namespace hyreach {

// Pins a single-valued selection of the set-valued dynamics plus the
// integration and branching knobs. The solution concept is nondeterministic;
// a policy makes one run reproducible.
struct SolvePolicy {
    enum class Selection { Vertex, Weights, RandomPerStep };
    enum class Priority { FlowFirst, JumpFirst, Branch };

    Selection flow_selection = Selection::Vertex;
    int flow_vertex = 0;
    Vec flow_weights;

    Selection jump_selection = Selection::Vertex;
    int jump_vertex = 0;
    Vec jump_weights;

    Priority priority = Priority::Branch;

    double step = 1e-3;
    double event_tol = 1e-10;     // bisection time tolerance
    double membership_tol = 1e-9;

    double t_max = kInf;
    int j_max = 1000000;
    double tau_max = 10.0;        // t + j budget
    double escape_norm = 1e8;

    std::uint64_t seed = 1;

    int branch_flow_selections = 3;
    int branch_jump_samples = 3;
    int max_flow_reentries = 64;
};

struct BranchNote {
    std::vector<int> at_choice;  // path prefix where the branch happened
    std::string why;
};

// Arcs sharing prefixes, in deterministic (depth-first, fixed child order)
// enumeration order; choices[i] replays arc i.
struct SolutionTree {
    std::vector<HybridArc> arcs;
    std::vector<std::vector<int>> choices;
    std::vector<BranchNote> notes;
};

namespace detail {

// one-step RK4 with a fixed selection closure
template <typename F>
Vec rk4_step(const F& f, const Vec& x, double h) {
    Vec k1 = f(x);
    Vec k2 = f(axpy(Vec(x), 0.5 * h, k1));
    Vec k3 = f(axpy(Vec(x), 0.5 * h, k2));
    Vec k4 = f(axpy(Vec(x), h, k3));
    Vec out = x;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct FlowSelection {
    SolvePolicy::Selection kind = SolvePolicy::Selection::Vertex;
    int vertex = 0;
    Vec weights;  // used for Weights
};

// Evaluate the selected single-valued branch of the hull map at y. For
// non-hull (inflated) maps, the selection falls back to a seeded sample /
// pool mean.
inline Vec select_flow_value(const MapSpec& F, const Vec& y, const FlowSelection& sel,
                             double radial, const Vec& radial_dir, std::uint64_t step_seed) {
    if (F.is_hull()) {
        const auto& verts = F.vertices();
        Vec out;
        if (sel.kind == SolvePolicy::Selection::Vertex) {
            out = verts[static_cast<std::size_t>(
                            std::min<int>(sel.vertex, static_cast<int>(verts.size()) - 1))]
                      .eval(y);
        } else {
            out = Vec(verts.front().comps.size(), 0.0);
            for (std::size_t i = 0; i < verts.size(); ++i)
                out = axpy(std::move(out), sel.weights[i], verts[i].eval(y));
        }
        if (radial != 0.0) {
            const double r = F.radius_expr().eval(y);
            out = axpy(std::move(out), r * radial, radial_dir);
        }
        return out;
    }
    auto pts = F.sample(y, 1, step_seed);
    if (pts.empty()) throw SolveError("flow map has empty value along the trajectory");
    return pts[0];
}

}  // namespace detail

// Flow classifier C~ at a point: interior probe, then the tangent-cone rule
// with the local sufficiency side condition on nearby boundary points.
struct FlowsPossibleCfg {
    int f_samples = 5;
    double interior_margin = 1e-7;
    std::vector<double> side_radii = {1e-2, 1e-3};
    int boundary_samples = 5;
    ConeCfg cone;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    bool check_side_condition = true;
};

inline ConeVerdict flows_possible(const HybridSystem& H, const Vec& x0,
                                  const FlowsPossibleCfg& cfg = {}) {
    ConeVerdict out;
    if (!H.C.contains(x0, cfg.tol)) {
        out.side = ConeSide::Outside;
        out.note = "not in the flow set";
        return out;
    }
    const double scale = std::max(1.0, norm(x0));
    if (H.C.interior_contains(x0, cfg.interior_margin * scale)) {
        out.side = ConeSide::Inside;
        out.note = "interior of the flow set";
        return out;
    }

    auto dirs = H.F.sample(x0, std::max(cfg.f_samples,
                                        H.F.is_hull() ? static_cast<int>(H.F.vertices().size()) : 1),
                           mix_seed(cfg.seed, 0xf1));
    if (dirs.empty()) {
        out.side = ConeSide::Outside;
        out.note = "flow map empty at the point";
        return out;
    }

    bool any_inside = false, all_outside = true;
    for (const auto& v : dirs) {
        auto cv = bouligand_contains(H.C, x0, v, cfg.cone);
        if (cv.inside()) {
            any_inside = true;
            all_outside = false;
            out.numeric_only = out.numeric_only || cv.numeric_only;
        } else if (!cv.outside()) {
            all_outside = false;
        }
    }
    if (all_outside) {
        out.side = ConeSide::Outside;
        out.note = "no flow direction in the tangent cone";
        return out;
    }
    if (!any_inside) {
        out.side = ConeSide::Inconclusive;
        out.note = "tangency test inconclusive for every sampled direction";
        return out;
    }
    if (!cfg.check_side_condition) {
        out.side = ConeSide::Inside;
        out.note = "tangent direction found (side condition skipped)";
        return out;
    }

    // viability side condition: nearby boundary points also admit a tangent
    // flow direction
    Rng rng(mix_seed(cfg.seed, 0xb0a7));
    for (double r : cfg.side_radii) {
        auto bpts = sample_boundary(H.C, x0, r * scale, cfg.boundary_samples, rng, cfg.tol);
        bool all_ok = true;
        for (const auto& xp : bpts) {
            auto vs = H.F.sample(xp, std::max(1, cfg.f_samples), mix_seed(cfg.seed, 0x51de));
            bool ok = false;
            for (const auto& v : vs)
                if (bouligand_contains(H.C, xp, v, cfg.cone).inside()) {
                    ok = true;
                    break;
                }
            if (!ok) {
                all_ok = false;
                out.witness = ConeWitness{r, xp};
                break;
            }
        }
        if (all_ok) {
            out.side = ConeSide::Inside;
            out.note = bpts.empty() ? "tangent direction found (no boundary neighbors sampled)"
                                    : "tangent direction and boundary side condition hold";
            return out;
        }
    }
    out.side = ConeSide::Inconclusive;
    out.note = "tangent direction found but the boundary side condition failed at a sample";
    return out;
}

namespace detail {

struct BranchState {
    Vec x;
    double t = 0.0;
    int j = 0;
    std::vector<HybridArc::Piece> done_pieces;
    std::vector<double> cur_times;
    std::vector<Vec> cur_states;
    bool budget_stopped = false;
    bool escaped = false;
    double escape_t = 0.0;
    int escape_j = 0;
    std::vector<int> choices;
    std::uint64_t rng_stream = 0;
};

class TreeSolver {
  public:
    TreeSolver(const HybridSystem& H, SolvePolicy policy, int branch_budget, std::uint64_t seed)
        : H_(H), policy_(std::move(policy)), budget_(std::max(1, branch_budget)), seed_(seed) {}

    SolutionTree run(const Vec& x0) {
        if (!H_.admissible_start(x0, policy_.membership_tol))
            throw SolveError("initial condition outside cl(C) u D");
        SolutionTree tree;
        BranchState root;
        root.x = x0;
        root.rng_stream = mix_seed(seed_, 0x7007);
        root.cur_times = {0.0};
        root.cur_states = {x0};
        leaves_used_ = 1;
        advance(std::move(root), tree);
        return tree;
    }

  private:
    // how many children may this decision spawn right now
    int allot(int want) {
        const int extra = std::min(want - 1, budget_ - leaves_used_);
        leaves_used_ += std::max(0, extra);
        return 1 + std::max(0, extra);
    }

    bool budget_hit(const BranchState& b) const {
        return b.t >= policy_.t_max - 1e-15 || b.j >= policy_.j_max ||
               b.t + b.j >= policy_.tau_max - 1e-15;
    }

    void finalize(BranchState b, SolutionTree& tree, bool budget_stop) {
        HybridArc arc(H_.dim);
        for (auto& p : b.done_pieces) arc.append_piece(std::move(p));
        if (!b.cur_times.empty()) {
            HybridArc::Piece p;
            p.j = b.j;
            p.times = std::move(b.cur_times);
            p.states = std::move(b.cur_states);
            arc.append_piece(std::move(p));
        }
        arc.set_budget_stopped(budget_stop || b.budget_stopped);
        if (b.escaped) arc.mark_escaped(b.escape_t, b.escape_j);
        tree.arcs.push_back(std::move(arc));
        tree.choices.push_back(std::move(b.choices));
    }

    FlowSelection selection_for_choice(int c, std::size_t k) const {
        FlowSelection s;
        if (c < static_cast<int>(k)) {
            s.kind = SolvePolicy::Selection::Vertex;
            s.vertex = c;
        } else {
            s.kind = SolvePolicy::Selection::Weights;
            s.weights = Vec(k, 1.0 / static_cast<double>(k));
        }
        return s;
    }

    FlowSelection policy_selection() const {
        FlowSelection s;
        switch (policy_.flow_selection) {
            case SolvePolicy::Selection::Vertex:
                s.kind = SolvePolicy::Selection::Vertex;
                s.vertex = policy_.flow_vertex;
                break;
            case SolvePolicy::Selection::Weights:
                s.kind = SolvePolicy::Selection::Weights;
                s.weights = policy_.flow_weights;
                break;
            case SolvePolicy::Selection::RandomPerStep:
                s.kind = SolvePolicy::Selection::RandomPerStep;
                break;
        }
        return s;
    }

    // selection closure for a single step
    auto stepper(const FlowSelection& sel, std::uint64_t step_seed) const {
        double radial = 0.0;
        Vec dir(static_cast<std::size_t>(H_.dim), 0.0);
        FlowSelection use = sel;
        if (sel.kind == SolvePolicy::Selection::RandomPerStep && H_.F.is_hull()) {
            Rng r(step_seed);
            use.kind = SolvePolicy::Selection::Weights;
            use.weights = r.simplex(H_.F.vertices().size());
            if (auto rc = H_.F.radius_expr().as_constant(); !rc || *rc != 0.0) {
                dir = r.unit_vector(static_cast<std::size_t>(H_.dim));
                radial = r.uniform();
            }
        }
        return [this, use, radial, dir, step_seed](const Vec& y) {
            return select_flow_value(H_.F, y, use, radial, dir, step_seed);
        };
    }

    // trial micro-steps: can the selected field keep the state in C
    bool can_flow_now(const Vec& x, const FlowSelection& sel, std::uint64_t stream) const {
        if (!H_.C.contains(x, policy_.membership_tol)) return false;
        Rng rng(mix_seed(stream, 0xca2));
        for (double h : {policy_.step, policy_.step / 4.0, policy_.step / 16.0,
                         policy_.step / 64.0}) {
            try {
                auto f = stepper(sel, rng.next_u64());
                Vec probe = rk4_step(f, x, h);
                if (H_.C.contains(probe, policy_.membership_tol)) return true;
            } catch (const Error&) {
                continue;
            }
        }
        return false;
    }

    enum class FlowExit { LeftC, EnteredD, Budget, Escape, Stalled };

    // integrate one flow phase; appends samples to the branch in place
    FlowExit flow_phase(BranchState& b, const FlowSelection& sel, bool watch_D) {
        Rng rng(mix_seed(b.rng_stream, 0xf10e + static_cast<std::uint64_t>(b.j)));
        bool was_in_D = H_.D.contains(b.x, policy_.membership_tol);
        int reentries = 0;
        for (;;) {
            if (budget_hit(b)) return FlowExit::Budget;
            if (norm(b.x) > policy_.escape_norm) {
                b.escaped = true;
                b.escape_t = b.t;
                b.escape_j = b.j;
                return FlowExit::Escape;
            }
            double h = policy_.step;
            h = std::min(h, policy_.t_max - b.t);
            h = std::min(h, policy_.tau_max - b.j - b.t);
            if (h <= policy_.event_tol) return FlowExit::Budget;

            const std::uint64_t step_seed = rng.next_u64();
            Vec x_next;
            try {
                auto f = stepper(sel, step_seed);
                x_next = rk4_step(f, b.x, h);
            } catch (const Error&) {
                return FlowExit::Stalled;
            }

            const bool leaves_C = !H_.C.contains(x_next, policy_.membership_tol);
            const bool enters_D =
                watch_D && !was_in_D && H_.D.contains(x_next, policy_.membership_tol);

            if (leaves_C || enters_D) {
                // bisect the sub-step duration to the event
                auto f = stepper(sel, step_seed);
                auto state_at = [&](double s) { return rk4_step(f, b.x, s); };
                double lo = 0.0, hi = h;
                auto crossed = [&](const Vec& y) {
                    return leaves_C ? !H_.C.contains(y, policy_.membership_tol)
                                    : H_.D.contains(y, policy_.membership_tol);
                };
                for (int it = 0; it < 80 && hi - lo > policy_.event_tol; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (crossed(state_at(mid)))
                        hi = mid;
                    else
                        lo = mid;
                }
                // land on the crossing: inside C for exits, inside D for entries
                const double s_event = leaves_C ? lo : hi;
                Vec xb = state_at(s_event);
                if (s_event > 0.0) {
                    b.t += s_event;
                    b.cur_times.push_back(b.t);
                    b.cur_states.push_back(xb);
                }
                b.x = std::move(xb);
                if (leaves_C) return FlowExit::LeftC;
                return FlowExit::EnteredD;
            }

            b.t += h;
            b.x = std::move(x_next);
            b.cur_times.push_back(b.t);
            b.cur_states.push_back(b.x);
            was_in_D = H_.D.contains(b.x, policy_.membership_tol);
            if (++reentries > 100000000) return FlowExit::Stalled;
        }
    }

    std::vector<Vec> jump_candidates(const Vec& x, std::uint64_t stream, int want) const {
        const int k = H_.G.is_hull() ? static_cast<int>(H_.G.vertices().size()) : 1;
        auto pts = H_.G.sample(x, std::max(want, k), mix_seed(stream, 0x9d));
        // dedupe near-identical candidates
        std::vector<Vec> out;
        for (auto& p : pts) {
            bool dup = false;
            for (const auto& q : out)
                if (dist(p, q) < 1e-12) {
                    dup = true;
                    break;
                }
            if (!dup) out.push_back(std::move(p));
            if (static_cast<int>(out.size()) >= want) break;
        }
        return out;
    }

    Vec jump_select(const Vec& x, std::uint64_t stream) const {
        if (H_.G.is_hull()) {
            const auto& verts = H_.G.vertices();
            switch (policy_.jump_selection) {
                case SolvePolicy::Selection::Vertex:
                    return verts[static_cast<std::size_t>(std::min<int>(
                                     policy_.jump_vertex, static_cast<int>(verts.size()) - 1))]
                        .eval(x);
                case SolvePolicy::Selection::Weights: {
                    Vec out(verts.front().comps.size(), 0.0);
                    for (std::size_t i = 0; i < verts.size(); ++i)
                        out = axpy(std::move(out), policy_.jump_weights[i], verts[i].eval(x));
                    return out;
                }
                case SolvePolicy::Selection::RandomPerStep: break;
            }
        }
        auto pts = H_.G.sample(x, 1, mix_seed(stream, 0x90d));
        if (pts.empty()) throw SolveError("jump map has empty value at the jump point");
        return pts[0];
    }

    void do_jump(BranchState& b, const Vec& y, SolutionTree&) {
        HybridArc::Piece p;
        p.j = b.j;
        p.times = std::move(b.cur_times);
        p.states = std::move(b.cur_states);
        b.done_pieces.push_back(std::move(p));
        b.j += 1;
        b.x = y;
        b.cur_times = {b.t};
        b.cur_states = {b.x};
    }

    // number of distinct flow selections worth branching over
    std::vector<FlowSelection> flow_branch_selections() const {
        std::vector<FlowSelection> out;
        if (!H_.F.is_hull()) {
            out.push_back(policy_selection());
            return out;
        }
        const std::size_t k = H_.F.vertices().size();
        const auto rc = H_.F.radius_expr().as_constant();
        const bool has_radius = !rc || *rc != 0.0;
        if (k == 1 && !has_radius) {
            FlowSelection s;
            s.kind = SolvePolicy::Selection::Vertex;
            out.push_back(s);
            return out;
        }
        for (std::size_t i = 0; i < k; ++i) {
            FlowSelection s;
            s.kind = SolvePolicy::Selection::Vertex;
            s.vertex = static_cast<int>(i);
            out.push_back(s);
        }
        if (k > 1) {
            FlowSelection c;
            c.kind = SolvePolicy::Selection::Weights;
            c.weights = Vec(k, 1.0 / static_cast<double>(k));
            out.push_back(c);
        }
        if (has_radius) out.push_back(policy_selection());
        if (static_cast<int>(out.size()) > policy_.branch_flow_selections)
            out.resize(static_cast<std::size_t>(policy_.branch_flow_selections));
        return out;
    }

    void advance(BranchState b, SolutionTree& tree) {
        for (int phase = 0; phase < 100000; ++phase) {
            if (budget_hit(b)) {
                finalize(std::move(b), tree, true);
                return;
            }
            const bool in_D = H_.D.contains(b.x, policy_.membership_tol);
            const FlowSelection base_sel = policy_selection();
            const bool flowable = can_flow_now(b.x, base_sel, b.rng_stream) ||
                                  can_flow_any(b.x, b.rng_stream);

            if (!flowable && !in_D) {
                finalize(std::move(b), tree, false);  // maximal at this resolution
                return;
            }

            bool do_flow;
            if (flowable && in_D) {
                switch (policy_.priority) {
                    case SolvePolicy::Priority::FlowFirst: do_flow = true; break;
                    case SolvePolicy::Priority::JumpFirst: do_flow = false; break;
                    case SolvePolicy::Priority::Branch: {
                        const int n = allot(2);
                        if (n == 2) {
                            tree.notes.push_back({b.choices, "flow and jump both possible"});
                            BranchState jb = b;
                            jb.choices.push_back(1);
                            jb.rng_stream = mix_seed(jb.rng_stream, 21);
                            jump_and_continue(std::move(jb), tree);
                            b.choices.push_back(0);
                            do_flow = true;
                        } else {
                            do_flow = true;  // budget exhausted: prefer flow
                        }
                        break;
                    }
                    default: do_flow = true; break;
                }
            } else {
                do_flow = flowable;
            }

            if (!do_flow) {
                jump_and_continue(std::move(b), tree);
                return;
            }

            // pick the flow selection, branching if allowed
            auto sels = flow_branch_selections();
            std::size_t use_sel = 0;
            if (sels.size() > 1 && policy_.priority == SolvePolicy::Priority::Branch) {
                const int n = allot(static_cast<int>(sels.size()));
                if (n > 1)
                    tree.notes.push_back({b.choices, "multiple flow selections"});
                for (int c = 1; c < n; ++c) {
                    BranchState child = b;
                    child.choices.push_back(c);
                    child.rng_stream = mix_seed(child.rng_stream, 31 + c);
                    run_flow_then_continue(std::move(child), sels[static_cast<std::size_t>(c)],
                                           tree);
                }
                if (n > 1) b.choices.push_back(0);
            } else if (sels.size() == 1 && sels[0].kind == SolvePolicy::Selection::Vertex &&
                       policy_.flow_selection != SolvePolicy::Selection::Vertex) {
                use_sel = 0;  // singleton map: selection immaterial
            }
            FlowSelection sel =
                policy_.priority == SolvePolicy::Priority::Branch && !sels.empty()
                    ? sels[use_sel]
                    : base_sel;
            run_flow_then_continue(std::move(b), sel, tree);
            return;
        }
        finalize(std::move(b), tree, true);
    }

    bool can_flow_any(const Vec& x, std::uint64_t stream) const {
        if (policy_.priority != SolvePolicy::Priority::Branch) return false;
        for (const auto& s : flow_branch_selections())
            if (can_flow_now(x, s, stream)) return true;
        return false;
    }

    void run_flow_then_continue(BranchState b, const FlowSelection& sel, SolutionTree& tree) {
        const bool watch_D =
            policy_.priority != SolvePolicy::Priority::FlowFirst;
        for (int reentry = 0; reentry < policy_.max_flow_reentries; ++reentry) {
            FlowExit ex = flow_phase(b, sel, watch_D);
            switch (ex) {
                case FlowExit::Budget:
                    finalize(std::move(b), tree, true);
                    return;
                case FlowExit::Escape:
                case FlowExit::Stalled:
                    finalize(std::move(b), tree, false);
                    return;
                case FlowExit::EnteredD: {
                    if (policy_.priority == SolvePolicy::Priority::JumpFirst) {
                        jump_and_continue(std::move(b), tree);
                        return;
                    }
                    // branch: jump here, or keep flowing through D
                    const bool can_continue = can_flow_now(b.x, sel, b.rng_stream);
                    if (!can_continue) {
                        jump_and_continue(std::move(b), tree);
                        return;
                    }
                    const int n = allot(2);
                    if (n == 2) {
                        tree.notes.push_back({b.choices, "jump set reached during flow"});
                        BranchState jb = b;
                        jb.choices.push_back(1);
                        jb.rng_stream = mix_seed(jb.rng_stream, 41);
                        jump_and_continue(std::move(jb), tree);
                        b.choices.push_back(0);
                    }
                    continue;  // keep flowing
                }
                case FlowExit::LeftC: {
                    if (H_.D.contains(b.x, policy_.membership_tol * 10)) {
                        jump_and_continue(std::move(b), tree);
                        return;
                    }
                    if (can_flow_now(b.x, sel, mix_seed(b.rng_stream, reentry + 1))) continue;
                    finalize(std::move(b), tree, false);
                    return;
                }
            }
        }
        finalize(std::move(b), tree, false);
    }

    void jump_and_continue(BranchState b, SolutionTree& tree) {
        if (b.j + 1 > policy_.j_max || b.t + b.j + 1 > policy_.tau_max) {
            finalize(std::move(b), tree, true);
            return;
        }
        std::vector<Vec> cands;
        if (policy_.priority == SolvePolicy::Priority::Branch)
            cands = jump_candidates(b.x, b.rng_stream, policy_.branch_jump_samples);
        else {
            try {
                cands = {jump_select(b.x, b.rng_stream)};
            } catch (const SolveError&) {
                finalize(std::move(b), tree, false);
                return;
            }
        }
        if (cands.empty()) {
            finalize(std::move(b), tree, false);
            return;
        }
        int n = 1;
        if (cands.size() > 1) {
            n = allot(static_cast<int>(cands.size()));
            if (n > 1) tree.notes.push_back({b.choices, "multiple jump selections"});
        }
        for (int c = 1; c < n; ++c) {
            BranchState child = b;
            child.choices.push_back(c);
            child.rng_stream = mix_seed(child.rng_stream, 51 + c);
            do_jump(child, cands[static_cast<std::size_t>(c)], tree);
            advance(std::move(child), tree);
        }
        if (n > 1) b.choices.push_back(0);
        b.rng_stream = mix_seed(b.rng_stream, 50);
        do_jump(b, cands[0], tree);
        advance(std::move(b), tree);
    }

    const HybridSystem& H_;
    SolvePolicy policy_;
    int budget_;
    std::uint64_t seed_;
    int leaves_used_ = 0;
};

}  // namespace detail

inline SolutionTree solve_tree(const HybridSystem& H, const Vec& x0, const SolvePolicy& policy,
                               int branch_budget, std::uint64_t seed) {
    SolvePolicy p = policy;
    p.seed = seed;
    detail::TreeSolver solver(H, p, branch_budget, seed);
    return solver.run(x0);
}

// Single solution under an explicit flow/jump priority.
inline HybridArc solve(const HybridSystem& H, const Vec& x0, const SolvePolicy& policy) {
    if (policy.priority == SolvePolicy::Priority::Branch)
        throw SolveError("single-solution solve requires an explicit flow/jump priority");
    detail::TreeSolver solver(H, policy, 1, policy.seed);
    SolutionTree t = solver.run(x0);
    return std::move(t.arcs.front());
}

enum class TargetMode { FirstHit, AllHits };

// Tree arcs truncated where they meet the terminal constraint X.
inline std::vector<HybridArc> solve_to_target(const HybridSystem& H, const Vec& x0,
                                              const SetSpec& X, const SolvePolicy& policy,
                                              int branch_budget, std::uint64_t seed,
                                              TargetMode mode = TargetMode::FirstHit,
                                              double tol = 1e-9) {
    SolutionTree tree = solve_tree(H, x0, policy, branch_budget, seed);
    std::vector<HybridArc> out;
    for (const auto& arc : tree.arcs) {
        for (std::size_t pi = 0; pi < arc.pieces().size(); ++pi) {
            const auto& piece = arc.pieces()[pi];
            bool stop = false;
            for (std::size_t si = 0; si < piece.states.size(); ++si) {
                if (!X.contains(piece.states[si], tol)) continue;
                out.push_back(arc.truncated(pi, si));
                if (mode == TargetMode::FirstHit) {
                    stop = true;
                    break;
                }
            }
            if (stop) break;
        }
    }
    return out;
}

struct SolutionCheck {
    bool ok = true;
    double max_flow_set_gap = 0.0;   // distance of flow samples from C
    double max_flow_residual = 0.0;  // derivative gap to the flow hull
    double max_jump_gap = 0.0;       // post-jump membership gap in G
    std::string note;
};

// Re-check an arc against the dynamics: flow samples in C, difference
// quotients in the flow hull up to tol + h^2, jump images in G.
inline SolutionCheck validate_solution(const HybridSystem& H, const HybridArc& arc, double tol,
                                       std::uint64_t seed = 0x5eed) {
    SolutionCheck res;
    if (!H.admissible_start(arc.start(), std::max(tol, 1e-9))) {
        res.ok = false;
        res.note = "initial condition outside cl(C) u D";
        return res;
    }
    for (const auto& p : arc.pieces()) {
        const bool flows = p.times.size() > 1;
        if (flows) {
            for (std::size_t i = 0; i < p.times.size(); ++i) {
                double gap = 0.0;
                if (!H.C.contains(p.states[i], tol)) {
                    try {
                        gap = H.C.distance(p.states[i]).value;
                    } catch (const EmptySetError&) {
                        gap = kInf;
                    }
                }
                res.max_flow_set_gap = std::max(res.max_flow_set_gap, gap);
            }
            for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
                const double h = p.times[i + 1] - p.times[i];
                if (h <= 0.0) continue;
                Vec quot = scaled(sub(p.states[i + 1], p.states[i]), 1.0 / h);
                Vec mid = scaled(add(p.states[i + 1], p.states[i]), 0.5);
                const double allowed = tol + h * h;
                const double gap = H.F.member_gap(mid, quot, 24, mix_seed(seed, i));
                res.max_flow_residual = std::max(res.max_flow_residual, std::max(0.0, gap - allowed));
            }
        }
    }
    for (std::size_t pi = 0; pi + 1 < arc.pieces().size(); ++pi) {
        const Vec& pre = arc.pieces()[pi].states.back();
        const Vec& post = arc.pieces()[pi + 1].states.front();
        double dgap = 0.0;
        if (!H.D.contains(pre, std::max(tol, 1e-7))) {
            try {
                dgap = H.D.distance(pre).value;
            } catch (const EmptySetError&) {
                dgap = kInf;
            }
        }
        const double ggap = H.G.member_gap(pre, post, 24, mix_seed(seed, pi));
        res.max_jump_gap = std::max({res.max_jump_gap, dgap, ggap});
    }
    res.ok = res.max_flow_set_gap <= std::max(tol, 1e-7) && res.max_flow_residual <= tol &&
             res.max_jump_gap <= std::max(tol, 1e-7);
    return res;
}

}  // namespace hyreach

#endif
