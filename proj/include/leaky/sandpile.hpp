#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "leaky/grid.hpp"
#include "leaky/rational.hpp"
#include "leaky/rule.hpp"

namespace leaky {

template <class S>
using HeightField = Grid<S>;

struct GridOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Point source: n chips at the origin of an otherwise empty field.
template <class S>
HeightField<S> point_source(const S& n, int radius) {
    if (is_negative(n)) throw std::invalid_argument("point_source: n must be >= 0");
    if constexpr (ScalarTraits<S>::mode == ScalarMode::Float64) {
        if (!std::isfinite(to_double(n)) || to_double(n) > 1e300)
            throw std::overflow_error(
                "point_source: n exceeds the float64 range of this engine (max ~1e300); "
                "use rational mode for larger chip counts");
    }
    HeightField<S> f(radius, S(0));
    f(0, 0) = n;
    return f;
}

template <class S>
struct StabilizationResult {
    HeightField<S> final;   // stabilized configuration f
    Grid<S> odometer;       // u(x) = topples(x) * threshold (mass sent + leaked)
    Grid<S> topples;        // integer-valued per-site topple count
    S max_topples{};        // m_n
    S leaked{};             // total leaked mass
    bool boundary_touched = false;
    std::uint64_t fire_events = 0;  // batched queue pops, diagnostic

    bool visited(int x, int y) const { return topples(x, y) > S(0); }
    std::size_t visited_count() const {
        std::size_t n = 0;
        for (const auto& c : topples.cells())
            if (c > S(0)) ++n;
        return n;
    }
    /// Largest |.|_inf radius of any visited site (0 if none topple).
    int visited_radius() const {
        int r = 0;
        const int R = topples.radius();
        for (int y = -R; y <= R; ++y)
            for (int x = -R; x <= R; ++x)
                if (topples(x, y) > S(0)) r = std::max({r, std::abs(x), std::abs(y)});
        return r;
    }
};

struct StabilizeOptions {
    bool auto_grow = true;  // grow 25% on boundary activity instead of failing
    int max_radius = 1 << 16;
};

namespace detail {

// Threshold comparison slack: float heights carry representation error after
// long add/subtract chains, so a site within 1e-12 relative of the threshold
// still fires. Exact mode compares exactly.
inline double fire_threshold(const ToppleRule<double>& rule) {
    return rule.threshold() * (1.0 - 1e-12);
}
inline Rational fire_threshold(const ToppleRule<Rational>& rule) { return rule.threshold(); }

template <class S>
void check_input_field(const HeightField<S>& f) {
    for (const auto& h : f.cells()) {
        if (!is_finite_scalar(h)) throw std::invalid_argument("stabilize: nonfinite height");
        if (is_negative(h)) throw std::invalid_argument("stabilize: negative height");
    }
}

template <class S>
struct StabilizeState {
    HeightField<S> h;
    Grid<S> cnt;
    ToppleRule<S> rule;
    S thr;
    S fire_at;
    S w[4];                       // emission per topple: E, W, N, S
    std::ptrdiff_t off[4] = {0, 0, 0, 0};  // index offsets, same order
    std::vector<std::uint8_t> edge;        // outermost-ring flags
    bool boundary_touched = false;
    std::uint64_t fire_events = 0;

    StabilizeState(const HeightField<S>& field, const ToppleRule<S>& r)
        : h(field), cnt(field.radius(), S(0)), rule(r), thr(r.threshold()), fire_at(fire_threshold(r)) {
        w[0] = r.c_right;
        w[1] = r.c_left;
        w[2] = r.c_up;
        w[3] = r.c_down;
        set_offsets();
    }

    void set_offsets() {
        const std::ptrdiff_t side = h.side();
        off[0] = +1;     // east neighbor receives c_right
        off[1] = -1;     // west
        off[2] = +side;  // north
        off[3] = -side;  // south
        edge.assign(h.size(), 0);
        const int R = h.radius();
        for (int v = -R; v <= R; ++v) {
            edge[h.index(v, -R)] = edge[h.index(v, R)] = 1;
            edge[h.index(-R, v)] = edge[h.index(R, v)] = 1;
        }
    }

    void grow(std::vector<std::uint8_t>& inq, std::vector<std::int32_t>& queue, std::size_t head,
              const StabilizeOptions& opt) {
        int nr = std::max(h.radius() + 4, (h.radius() * 5 + 3) / 4);
        if (nr > opt.max_radius) throw GridOverflowError("stabilize: grid exceeded max radius");
        const Grid<S> old_h = h;
        h = old_h.grown(nr, S(0));
        cnt = cnt.grown(nr, S(0));
        set_offsets();
        // re-index in-flight queue entries
        std::vector<std::int32_t> nq;
        nq.reserve(queue.size() - head);
        std::vector<std::uint8_t> ninq(h.size(), 0);
        for (std::size_t k = head; k < queue.size(); ++k) {
            int x = old_h.x_of(static_cast<std::size_t>(queue[k]));
            int y = old_h.y_of(static_cast<std::size_t>(queue[k]));
            std::int32_t ni = static_cast<std::int32_t>(h.index(x, y));
            nq.push_back(ni);
            ninq[static_cast<std::size_t>(ni)] = 1;
        }
        queue.swap(nq);
        inq.swap(ninq);
        boundary_touched = true;
    }

    // Fires site i with the full pending batch; returns the batch size.
    // Neighbor indices must be in range (callers keep edge sites out).
    S fire(std::size_t i) {
        S k = floor_quotient(h[i], thr);
        if (k < S(1)) k = S(1);
        h[i] -= k * thr;
        if constexpr (ScalarTraits<S>::mode == ScalarMode::Float64) {
            if (h[i] < 0) h[i] = 0;  // representation error of k*thr at extreme magnitudes
        }
        cnt[i] += k;
        for (int t = 0; t < 4; ++t) h[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off[t])] += k * w[t];
        ++fire_events;
        return k;
    }

    StabilizationResult<S> finish() && {
        StabilizationResult<S> res;
        res.max_topples = S(0);
        if constexpr (ScalarTraits<S>::mode == ScalarMode::Float64) {
            KahanSum total;
            for (const auto& c : cnt.cells()) {
                total.add(c);
                if (c > res.max_topples) res.max_topples = c;
            }
            res.leaked = total.value() * rule.leak_per_topple();
        } else {
            S total(0);
            for (const auto& c : cnt.cells()) {
                total += c;
                if (c > res.max_topples) res.max_topples = c;
            }
            res.leaked = total * rule.leak_per_topple();
        }
        res.odometer = Grid<S>(cnt.radius(), S(0));
        for (std::size_t i = 0; i < cnt.size(); ++i) res.odometer[i] = cnt[i] * thr;
        res.boundary_touched = boundary_touched;
        res.fire_events = fire_events;
        res.final = std::move(h);
        res.topples = std::move(cnt);
        return res;
    }
};

}  // namespace detail

/// Stabilizes a field under the leaky toppling rule with batched firing and a
/// FIFO worklist: a site holding h fires floor(h/threshold) times atomically.
/// The abelian property makes the result order-independent.
template <class S>
StabilizationResult<S> stabilize(const HeightField<S>& field, const ToppleRule<S>& rule,
                                 const StabilizeOptions& opt = {}) {
    if (!(rule.d > S(1)))
        throw std::invalid_argument("stabilize: leaky mode requires d > 1");
    detail::check_input_field(field);
    detail::StabilizeState<S> st(field, rule);

    std::vector<std::int32_t> queue;
    std::vector<std::uint8_t> inq(st.h.size(), 0);
    for (std::size_t i = 0; i < st.h.size(); ++i)
        if (st.h[i] >= st.fire_at) {
            queue.push_back(static_cast<std::int32_t>(i));
            inq[i] = 1;
        }

    std::size_t head = 0;
    while (head < queue.size()) {
        std::size_t i = static_cast<std::size_t>(queue[head]);
        if (st.edge[i]) {
            if (!opt.auto_grow) {
                st.boundary_touched = true;
                throw GridOverflowError("stabilize: active site reached the fixed grid edge");
            }
            st.grow(inq, queue, head, opt);
            head = 0;
            continue;
        }
        ++head;
        inq[i] = 0;
        if (!(st.h[i] >= st.fire_at)) continue;
        st.fire(i);
        for (int t = 0; t < 4; ++t) {
            std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + st.off[t]);
            if (st.h[j] >= st.fire_at && !inq[j]) {
                queue.push_back(static_cast<std::int32_t>(j));
                inq[j] = 1;
            }
        }
        if (st.h[i] >= st.fire_at && !inq[i]) {  // float-mode residual above slack line
            queue.push_back(static_cast<std::int32_t>(i));
            inq[i] = 1;
        }
        if (head > (1u << 22) && head * 2 > queue.size()) {  // compact the ring
            queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }
    return std::move(st).finish();
}

/// Stabilization with a randomized firing order; used to exercise abelianness.
/// Picks a uniformly random active site at each step.
template <class S>
StabilizationResult<S> stabilize_random_order(const HeightField<S>& field, const ToppleRule<S>& rule,
                                              std::mt19937_64& rng, const StabilizeOptions& opt = {}) {
    if (!(rule.d > S(1)))
        throw std::invalid_argument("stabilize: leaky mode requires d > 1");
    detail::check_input_field(field);
    detail::StabilizeState<S> st(field, rule);

    std::vector<std::int32_t> active;
    std::vector<std::uint8_t> inq(st.h.size(), 0);
    for (std::size_t i = 0; i < st.h.size(); ++i)
        if (st.h[i] >= st.fire_at) {
            active.push_back(static_cast<std::int32_t>(i));
            inq[i] = 1;
        }

    while (!active.empty()) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, active.size() - 1)(rng);
        std::size_t i = static_cast<std::size_t>(active[pick]);
        if (st.edge[i]) {
            if (!opt.auto_grow) throw GridOverflowError("stabilize: active site reached the fixed grid edge");
            st.grow(inq, active, 0, opt);
            continue;
        }
        active[pick] = active.back();
        active.pop_back();
        inq[i] = 0;
        if (!(st.h[i] >= st.fire_at)) continue;
        st.fire(i);
        for (int t = 0; t < 4; ++t) {
            std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + st.off[t]);
            if (st.h[j] >= st.fire_at && !inq[j]) {
                active.push_back(static_cast<std::int32_t>(j));
                inq[j] = 1;
            }
        }
        if (st.h[i] >= st.fire_at && !inq[i]) {
            active.push_back(static_cast<std::int32_t>(i));
            inq[i] = 1;
        }
    }
    return std::move(st).finish();
}

/// The operator T: (Tu)(x) = sum_{y~x} c_{y->x}/(c d) * u(y) - u(x), with
/// u = 0 outside the grid. Tu applied to the odometer gives f - n*delta_0.
template <class S>
Grid<S> apply_T(const Grid<S>& u, const ToppleRule<S>& rule) {
    for (const auto& v : u.cells())
        if (!is_finite_scalar(v)) throw std::invalid_argument("apply_T: nonfinite input");
    const S cd = rule.threshold();
    const int R = u.radius();
    Grid<S> out(R, S(0));
    for (int y = -R; y <= R; ++y) {
        for (int x = -R; x <= R; ++x) {
            S recv(0);
            if (x > -R) recv += rule.c_right * u(x - 1, y);  // west neighbor sends east
            if (x < R) recv += rule.c_left * u(x + 1, y);
            if (y > -R) recv += rule.c_up * u(x, y - 1);
            if (y < R) recv += rule.c_down * u(x, y + 1);
            out(x, y) = recv / cd - u(x, y);
        }
    }
    return out;
}

/// Suggested starting grid radius for a point source: ceil(log n / |S(w+)|
/// at a = 0) plus margin, where |S| = log z_+(1) is the axis decay rate.
inline int suggest_radius(double log_n, double d) {
    if (!(d > 1.0)) throw std::invalid_argument("suggest_radius: requires d > 1");
    double v = 4.0 * d - 2.0;
    double z = (v + std::sqrt(v * v - 4.0)) / 2.0;
    double rate = std::log(z);
    int r = static_cast<int>(std::ceil(std::max(0.0, log_n) / rate)) + 16;
    return r;
}

/// Directional reach of a visited set: for each slope a in [0, 1], the largest
/// integer r whose nearest lattice point to (r, a r) is visited.
struct RadialSample {
    double a = 0;
    int lattice_r = 0;      // parameter r along the ray
    double euclid_r = 0;    // |(r, round(a r))|_2
};

template <class S>
std::vector<RadialSample> radial_profile(const StabilizationResult<S>& res, const std::vector<double>& slopes) {
    if (res.visited_count() == 0) throw std::invalid_argument("radial_profile: empty visited set");
    std::vector<RadialSample> out;
    const int R = res.topples.radius();
    for (double a : slopes) {
        RadialSample s;
        s.a = a;
        for (int r = 0; r <= R; ++r) {
            int yy = static_cast<int>(std::lround(a * r));
            if (!res.topples.contains(r, yy)) break;
            if (res.topples(r, yy) > S(0)) {
                s.lattice_r = r;
                s.euclid_r = std::hypot(static_cast<double>(r), static_cast<double>(yy));
            }
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace leaky
