#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "leaky/grid.hpp"
#include "leaky/rational.hpp"
#include "leaky/sandpile.hpp"

namespace leaky {

/// Modified ASM used by the d -> 1 coupling: a site topples once it holds at
/// least 5 chips, sending 1 chip to each neighbor (so it keeps at least 1).
struct ModifiedAsmResult {
    Grid<std::int64_t> final;
    Grid<std::int64_t> topples;
    std::int64_t max_topples = 0;  // m_n
    std::uint64_t total_fires = 0;
    std::vector<std::int32_t> fire_sequence;  // site indices, only when recorded
};

namespace detail {

inline int modified_asm_radius(std::int64_t n) {
    // classical-ASM footprint is O(sqrt(n)); generous margin, still tiny grids
    double r = 2.5 * std::sqrt(static_cast<double>(n) + 1.0) + 4.0;
    return static_cast<int>(r);
}

}  // namespace detail

/// Stabilizes n chips at the origin under the threshold-5 / send-4 rule.
/// With record_sequence the (unbatched) firing order is kept for replay.
inline ModifiedAsmResult stabilize_modified_asm(std::int64_t n, int radius = -1,
                                                bool record_sequence = false) {
    if (n < 0) throw std::invalid_argument("stabilize_modified_asm: n must be >= 0");
    if (radius < 0) radius = detail::modified_asm_radius(n);
    Grid<std::int64_t> h(radius, 0);
    Grid<std::int64_t> cnt(radius, 0);
    h(0, 0) = n;

    ModifiedAsmResult res;
    std::vector<std::int32_t> queue;
    std::vector<std::uint8_t> inq(h.size(), 0);
    if (n >= 5) {
        queue.push_back(static_cast<std::int32_t>(h.index(0, 0)));
        inq[h.index(0, 0)] = 1;
    }
    const std::ptrdiff_t off[4] = {+1, -1, +h.side(), -h.side()};
    std::size_t head = 0;
    while (head < queue.size()) {
        std::size_t i = static_cast<std::size_t>(queue[head++]);
        inq[i] = 0;
        if (h[i] < 5) continue;
        int x = h.x_of(i), y = h.y_of(i);
        if (h.on_edge(x, y)) throw GridOverflowError("stabilize_modified_asm: grid too small");
        std::int64_t k = record_sequence ? 1 : (h[i] - 1) / 4;  // leaves a height in [1,5)
        h[i] -= 4 * k;
        cnt[i] += k;
        res.total_fires += static_cast<std::uint64_t>(k);
        if (record_sequence) res.fire_sequence.push_back(static_cast<std::int32_t>(i));
        for (int t = 0; t < 4; ++t) {
            std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off[t]);
            h[j] += k;
            if (h[j] >= 5 && !inq[j]) {
                queue.push_back(static_cast<std::int32_t>(j));
                inq[j] = 1;
            }
        }
        if (h[i] >= 5 && !inq[i]) {
            queue.push_back(static_cast<std::int32_t>(i));
            inq[i] = 1;
        }
    }
    for (const auto& c : cnt.cells()) res.max_topples = std::max(res.max_topples, c);
    res.final = std::move(h);
    res.topples = std::move(cnt);
    return res;
}

/// Exact replay of the modified-ASM firing sequence inside the Leaky-ASM with
/// d = 1 + t, t = 1/(8 m_n), verifying the Theorem-1.5 coupling site by site.
struct CouplingReport {
    std::int64_t n = 0;
    std::int64_t m_n = 0;
    Rational t;                  // leakiness used (0 when the run is trivial)
    std::uint64_t firings = 0;   // shared firing count
    bool trivial = false;        // no site ever topples
    bool replay_feasible = true;     // every replayed site was above threshold
    bool leaky_stable_at_end = true; // no leaky site can still fire
    bool ceil_matches = true;        // B = ceil(L) everywhere
    bool strict_sandwich = true;     // B-1 < L <= B, equality iff never toppled
    bool visited_equal = true;       // same visited sets
    Grid<std::int64_t> modified_final;
    Grid<Rational> leaky_final;

    bool coupled() const {
        return replay_feasible && leaky_stable_at_end && ceil_matches && strict_sandwich &&
               visited_equal;
    }
};

inline CouplingReport coupled_run(std::int64_t n) {
    CouplingReport rep;
    rep.n = n;
    ModifiedAsmResult mod = stabilize_modified_asm(n, -1, /*record_sequence=*/true);
    rep.m_n = mod.max_topples;
    rep.firings = mod.total_fires;
    rep.modified_final = mod.final;
    if (mod.max_topples == 0) {
        rep.trivial = true;
        rep.leaky_final = Grid<Rational>(mod.final.radius(), Rational(0));
        rep.leaky_final(0, 0) = Rational(n);
        return rep;
    }

    rep.t = Rational(1, 8 * mod.max_topples);
    const Rational thr = Rational(4) * (Rational(1) + rep.t);
    const int R = mod.final.radius();
    Grid<Rational> L(R, Rational(0));
    Grid<std::int64_t> lcnt(R, 0);
    L(0, 0) = Rational(n);
    const std::ptrdiff_t off[4] = {+1, -1, +L.side(), -L.side()};
    for (std::int32_t si : mod.fire_sequence) {
        std::size_t i = static_cast<std::size_t>(si);
        if (L[i] < thr) {
            rep.replay_feasible = false;
            break;
        }
        L[i] -= thr;
        lcnt[i] += 1;
        for (int t4 = 0; t4 < 4; ++t4) L[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off[t4])] += 1;
    }

    if (rep.replay_feasible) {
        for (std::size_t i = 0; i < L.size(); ++i) {
            if (L[i] >= thr) rep.leaky_stable_at_end = false;
            const Rational B(mod.final[i]);
            if (ceil_rational(L[i]) != B) rep.ceil_matches = false;
            if (mod.topples[i] > 0) {
                if (!(B - 1 < L[i] && L[i] < B)) rep.strict_sandwich = false;
            } else if (L[i] != B) {
                rep.strict_sandwich = false;
            }
            if ((mod.topples[i] > 0) != (lcnt[i] > 0)) rep.visited_equal = false;
        }
    }
    rep.leaky_final = std::move(L);
    return rep;
}

}  // namespace leaky
