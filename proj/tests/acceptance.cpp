// Acceptance suite: one PASS/FAIL line per criterion. Expected values come
// from the naive oracles in support.hpp or from direct simulation, never from
// the code under test.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace tvr;
using support::cfg;
using support::Closure;
using support::plain;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
    bool ok = true;
    std::string detail;
};

/// Collects the first few failure descriptions.
struct Failures {
    std::size_t count = 0;
    std::string first;

    void add(const std::string& what)
    {
        if (count++ == 0)
            first = what;
    }
    [[nodiscard]] std::string note() const { return count == 0 ? "" : "; first failure: " + first; }
};

long long rnd(std::mt19937_64& rng, long long lo, long long hi)
{
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

Configuration at(StateId q, long long a, long long b)
{
    return Configuration{q, IntVector{a, b}};
}

std::string show(const Configuration& c)
{
    return "s" + std::to_string(c.state.value) + c.counters.to_string();
}

/// Random one-counter automaton with unit steps; zero-tests when `tests`.
Tvass random_oca(std::mt19937_64& rng, std::size_t states, bool tests)
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < states; ++i)
        names.push_back("s" + std::to_string(i));
    std::vector<TransitionSpec> specs;
    for (std::size_t p = 0; p < states; ++p)
        for (std::size_t q = 0; q < states; ++q)
            for (int k = 0; k < 2; ++k) {
                if (rng() % 3 == 0)
                    continue;
                const long long a = rnd(rng, tests ? -2 : -1, 1);
                const std::string id = "t" + std::to_string(specs.size());
                specs.push_back({id, names[p], a == -2 ? Action::test() : Action::add(IntVector{a}), names[q]});
            }
    return Tvass(1, names, specs);
}

/// Plain BFS over (state, counter ≤ cap, extra) for one-counter queries.
/// `extra` is folded by `fold` along each step; accepts when `goal` holds.
bool oca_bfs(const Tvass& oca, StateId p, long long x, long long cap, long long extra0,
             const std::function<long long(long long, TransitionId)>& fold,
             const std::function<bool(StateId, long long, long long)>& goal)
{
    std::set<std::tuple<std::uint32_t, long long, long long>> seen{{p.value, x, extra0}};
    std::deque<std::tuple<std::uint32_t, long long, long long>> queue{{p.value, x, extra0}};
    while (!queue.empty()) {
        auto [s, c, e] = queue.front();
        queue.pop_front();
        if (goal(StateId{s}, c, e))
            return true;
        for (TransitionId t : oca.outgoing(StateId{s})) {
            auto next = step(oca, Configuration{StateId{s}, IntVector{c}}, t);
            if (!next)
                continue;
            const long long nc = static_cast<long long>(next->counters[0]);
            if (nc > cap)
                continue;
            const auto key = std::tuple{next->state.value, nc, fold(e, t)};
            if (seen.insert(key).second)
                queue.push_back(key);
        }
    }
    return false;
}

// ---------------------------------------------------------------------------

Result golden_closed_form()
{
    const auto t0 = Clock::now();
    const Tvass ex = support::ex_model();
    const Tvass rev = reverse(ex);
    const StateId a = ex.state("A");
    Failures f;
    bool closed = true;
    std::vector<std::vector<bool>> brute(31, std::vector<bool>(31));
    // the backward set of A(0,y) is finite: c2 + 4c1/3 never grows in the reversed model
    for (long long y = 0; y <= 30; ++y) {
        const Closure back = support::closure(rev, at(a, 0, y), 1'000'000, 2'000'000);
        closed = closed && back.closed;
        for (long long x = 0; x <= 30; ++x) {
            brute[x][y] = back.seen.count(plain(at(a, 0, x))) > 0;
            if (brute[x][y] != support::ex_closed_form(x, y))
                f.add("x=" + std::to_string(x) + " y=" + std::to_string(y));
        }
    }
    const double brute_time = seconds_since(t0);
    // the decider on the same pairs
    Failures decider;
    for (long long x = 0; x <= 30; ++x)
        for (long long y = 0; y <= 30; ++y) {
            const decide::Verdict v = decide::reach(ex, at(a, 0, x), at(a, 0, y));
            const bool expect = brute[x][y];
            if (v.outcome != (expect ? decide::Outcome::yes : decide::Outcome::no))
                decider.add("reach x=" + std::to_string(x) + " y=" + std::to_string(y) + " gave " +
                            decide::to_string(v.outcome));
        }
    const double total = seconds_since(t0);
    std::ostringstream s;
    s << "961 pairs, " << f.count << " mismatches with the closed form, backward sets "
      << (closed ? "closed" : "NOT closed") << ", reach disagreements " << decider.count << ", " << total << " s"
      << f.note() << decider.note();
    return {f.count == 0 && decider.count == 0 && closed && total < 10.0 && brute_time < 10.0, s.str()};
}

Result example_scheme()
{
    const Tvass ex = support::ex_model();
    const StateId a = ex.state("A");
    Failures f;
    for (long long k = 0; k <= 10; ++k) {
        const Configuration from = at(a, 3, 5), to = at(a, 3 + 2 * k, 5);
        const decide::Verdict v = decide::reach(ex, from, to);
        if (v.outcome != decide::Outcome::yes) {
            f.add("k=" + std::to_string(k) + " gave " + decide::to_string(v.outcome));
            continue;
        }
        const auto* cert = std::get_if<CountedLps>(&v.certificate);
        if (!cert || !decide::check_certificate(ex, from, to, *cert))
            f.add("k=" + std::to_string(k) + " certificate rejected");
        // the certificate also replays when expanded, independently of eval_counts
        if (cert && apply_trace(ex, from, cert->expand()) != to)
            f.add("k=" + std::to_string(k) + " expansion does not replay");
    }
    const Trace pi = ex.trace({"dAA", "dAB", "dBB", "dBB", "dBB", "dBB", "dBA"});
    const auto run = replay(ex, at(a, 3, 5), pi);
    const StateId b = ex.state("B");
    const std::vector<Configuration> expected{at(a, 3, 5), at(a, 0, 9), at(b, 0, 9), at(b, 1, 8),
                                              at(b, 2, 7), at(b, 3, 6), at(b, 4, 5), at(a, 5, 5)};
    if (!run || run->configurations != expected)
        f.add("example run does not replay as listed");
    return {f.count == 0, "k in [0,10], " + std::to_string(f.count) + " failures" + f.note()};
}

Result path_and_cycle_relations()
{
    std::mt19937_64 rng(101);
    std::size_t paths = 0, cycles = 0, held = 0;
    Failures f;
    for (int attempt = 0; attempt < 400'000 && (paths < 1000 || cycles < 1000); ++attempt) {
        const std::size_t states = 1 + rng() % 4;
        const Tvass m = support::random_model(rng, states, 3, 0.25, 3 + rng() % 8);
        const StateId start{static_cast<std::uint32_t>(rng() % states)};
        const Trace walk = support::random_walk(rng, m, start, 1 + rng() % 12);
        if (walk.empty())
            continue;
        const IntVector x{rnd(rng, 0, 15), rnd(rng, 0, 15)};
        auto random_y = [&] { return IntVector{rnd(rng, 0, 15), rnd(rng, 0, 15)}; };
        if (paths < 1000 && is_feasible(m, walk)) {
            ++paths;
            IntVector y = x + displacement(m, walk);
            if (rng() % 2 || !y.is_nonnegative())
                y = random_y();
            const StateId q = m.transition(walk.back()).target;
            const bool sim = apply_trace(m, Configuration{start, x}, walk) == Configuration{q, y};
            const bool formula = path_relation(m, walk, x, y);
            held += sim;
            if (sim != formula)
                f.add("path of length " + std::to_string(walk.size()) + " from " + x.to_string());
        }
        // the longest prefix that returns to the start is a cycle
        std::size_t len = 0;
        for (std::size_t i = 0; i < walk.size(); ++i)
            if (m.transition(walk[i]).target == start)
                len = i + 1;
        if (cycles >= 1000 || len == 0)
            continue;
        const Trace beta(walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>(len));
        if (!is_feasible(m, beta))
            continue;
        ++cycles;
        const long long n = rnd(rng, 1, 5);
        IntVector y = x + Int(n) * displacement(m, beta);
        if (rng() % 2 || !y.is_nonnegative())
            y = random_y();
        const bool sim = apply_trace(m, Configuration{start, x}, repeat(beta, static_cast<std::size_t>(n))) ==
                         Configuration{start, y};
        const bool formula = cycle_relation(m, beta, x, y, n);
        held += sim;
        if (sim != formula)
            f.add("cycle of length " + std::to_string(beta.size()) + " n=" + std::to_string(n) + " from " + x.to_string());
    }
    std::ostringstream s;
    s << paths << " paths and " << cycles << " cycles (" << held << " related), " << f.count << " disagreements"
      << f.note();
    return {paths >= 1000 && cycles >= 1000 && f.count == 0, s.str()};
}

Result reversed_prefix()
{
    std::mt19937_64 rng(202);
    Failures f;
    for (int i = 0; i < 1000; ++i) {
        const Tvass m = support::random_model(rng, 1 + rng() % 4, 3, 0.25, 3 + rng() % 8);
        const Trace pi = support::random_walk(rng, m, StateId{0}, rng() % 13);
        // recompute all three quantities by direct prefix scans
        IntVector sum(2), low(2), high(2);
        bool test_seen = false;
        for (TransitionId t : pi) {
            const Action& act = m.transition(t).action;
            if (act.is_test()) {
                test_seen = true;
                continue;
            }
            sum += act.delta();
            for (std::size_t k = 0; k < 2; ++k)
                low[k] = std::min(low[k], sum[k]);
        }
        // m_π = −(prefix minima); reversed: max over suffix sums = Δ − prefix minima
        const IntVector minimum(std::vector<Int>{-low[0], -low[1]});
        for (std::size_t k = 0; k < 2; ++k)
            high[k] = sum[k] - low[k];
        (void)test_seen;
        const bool lib = reversed_min_prefix(m, pi) == min_prefix_vector(m, pi) + displacement(m, pi);
        const bool direct = min_prefix_vector(m, pi) == minimum && reversed_min_prefix(m, pi) == high;
        if (!lib || !direct)
            f.add("trace of length " + std::to_string(pi.size()));
    }
    return {f.count == 0, "1000 traces, " + std::to_string(f.count) + " failures" + f.note()};
}

/// A random feasible scheme cut out of a random walk, with a start vector and
/// a target that is usually reachable along it.
struct LpsCase {
    Tvass model;
    LinearPathScheme scheme;
    StateId target_state;
    IntVector x, y;
};

std::optional<LpsCase> random_lps(std::mt19937_64& rng)
{
    const std::size_t states = 1 + rng() % 3;
    Tvass m = support::random_model(rng, states, 2, 0.2, 3 + rng() % 6);
    const StateId start{static_cast<std::uint32_t>(rng() % states)};
    const Trace walk = support::random_walk(rng, m, start, 6 + rng() % 11);
    if (walk.empty())
        return std::nullopt;
    std::vector<StateId> visit{start};
    for (TransitionId t : walk)
        visit.push_back(m.transition(t).target);
    const std::size_t k = rng() % 4;
    LinearPathScheme L;
    L.alpha.emplace_back();
    std::size_t i = 0;
    while (i < walk.size()) {
        if (L.beta.size() < k && rng() % 3 == 0) {
            std::vector<std::size_t> ends;
            for (std::size_t j = i + 1; j <= std::min(walk.size(), i + 6); ++j)
                if (visit[j] == visit[i])
                    ends.push_back(j);
            if (!ends.empty()) {
                const std::size_t j = ends[rng() % ends.size()];
                L.beta.emplace_back(walk.begin() + static_cast<std::ptrdiff_t>(i), walk.begin() + static_cast<std::ptrdiff_t>(j));
                L.alpha.emplace_back();
                i = j;
                continue;
            }
        }
        L.alpha.back().push_back(walk[i++]);
    }
    if (L.skeleton().empty())
        return std::nullopt;
    for (const Trace& a : L.alpha)
        if (!is_feasible(m, a))
            return std::nullopt;
    for (const Trace& b : L.beta)
        if (!is_feasible(m, b))
            return std::nullopt;
    const StateId q = visit.back();
    IntVector x{rnd(rng, 0, 6), rnd(rng, 0, 6)};
    std::vector<Int> counts;
    for (std::size_t j = 0; j < L.beta.size(); ++j)
        counts.emplace_back(rnd(rng, 0, 4));
    auto end = eval_counts(m, CountedLps{L, counts}, x);
    IntVector y = end ? end->counters : IntVector{rnd(rng, 0, 8), rnd(rng, 0, 8)};
    return LpsCase{std::move(m), std::move(L), q, std::move(x), std::move(y)};
}

/// Every count vector in [lo,hi]^k.
void for_each_counts(std::size_t k, long long lo, long long hi, const std::function<void(const std::vector<Int>&)>& visit)
{
    std::vector<Int> n(k, Int(lo));
    while (true) {
        visit(n);
        std::size_t i = 0;
        while (i < k && n[i] == hi)
            n[i++] = lo;
        if (i == k)
            return;
        ++n[i];
    }
}

std::vector<LpsCase> lps_corpus()
{
    std::mt19937_64 rng(303);
    std::vector<LpsCase> out;
    std::size_t with_cycles = 0;
    while (out.size() < 300 || with_cycles < 200) {
        auto c = random_lps(rng);
        if (!c)
            continue;
        with_cycles += !c->scheme.beta.empty();
        out.push_back(std::move(*c));
    }
    return out;
}

Result system_soundness(const std::vector<LpsCase>& corpus)
{
    Failures f;
    std::size_t solved = 0, replaying = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const LpsCase& c = corpus[i];
        const std::size_t k = c.scheme.beta.size();
        const IneqSystem sys = build_system(c.model, c.scheme, c.x, c.y);
        const Configuration goal{c.target_state, c.y};
        auto replays = [&](const std::vector<Int>& n) { return eval_counts(c.model, CountedLps{c.scheme, n}, c.x) == goal; };
        const auto small = smallsol::find_small_solution(sys.to_inhom(), Int(64));
        if (small.status == smallsol::SearchStatus::found) {
            ++solved;
            if (!replays(small.solution->values()))
                f.add("case " + std::to_string(i) + ": small solution does not replay");
        }
        for_each_counts(k, 0, 6, [&](const std::vector<Int>& n) {
            if (sys.satisfied_by(n) && !replays(n))
                f.add("case " + std::to_string(i) + ": a solution does not replay");
        });
        for_each_counts(k, 1, 4, [&](const std::vector<Int>& n) {
            if (replays(n)) {
                ++replaying;
                if (!sys.satisfied_by(n))
                    f.add("case " + std::to_string(i) + ": replaying counts violate the system");
            }
        });
    }
    std::ostringstream s;
    s << corpus.size() << " schemes, " << solved << " solved, " << replaying << " replaying count vectors, " << f.count
      << " failures" << f.note();
    return {f.count == 0, s.str()};
}

Result lps_reach_completeness(const std::vector<LpsCase>& corpus)
{
    Failures f;
    std::size_t witnessed = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const LpsCase& c = corpus[i];
        const Configuration goal{c.target_state, c.y};
        bool brute = false;
        for_each_counts(c.scheme.beta.size(), 0, 6, [&](const std::vector<Int>& n) {
            brute = brute || eval_counts(c.model, CountedLps{c.scheme, n}, c.x) == goal;
        });
        const LpsReachResult r = lps_reach(c.model, c.scheme, c.x, c.y);
        if (r.counts && eval_counts(c.model, CountedLps{c.scheme, *r.counts}, c.x) != goal)
            f.add("case " + std::to_string(i) + ": returned counts do not replay");
        if (brute) {
            ++witnessed;
            if (!r.counts)
                f.add("case " + std::to_string(i) + ": witness missed");
        }
    }
    std::ostringstream s;
    s << corpus.size() << " schemes, " << witnessed << " with a brute-force witness, " << f.count << " failures" << f.note();
    return {f.count == 0 && witnessed > 0, s.str()};
}

Result pottier_suite()
{
    using namespace smallsol;
    std::mt19937_64 rng(404);
    Failures f;
    std::size_t inhom_found = 0;
    for (int round = 0; round < 200; ++round) {
        const std::size_t k = 1 + rng() % 2, e = 1 + rng() % 2;
        HomSystem hom;
        InhomSystem inhom;
        inhom.rhs = IntVector(e);
        for (std::size_t i = 0; i < e; ++i) {
            IntVector row(k);
            for (std::size_t j = 0; j < k; ++j)
                row[j] = rnd(rng, -2, 2);
            hom.matrix.push_back(row);
            inhom.matrix.push_back(row);
            inhom.rhs[i] = rnd(rng, -2, 2);
        }
        const std::string tag = "system " + std::to_string(round);

        // homogeneous: brute-force the solutions in a box twice the bound wide
        const Int bound = pottier_bound(hom);
        const long long side = 2 * static_cast<long long>(bound);
        std::vector<IntVector> sols;
        for_each_counts(k, 0, side, [&](const std::vector<Int>& v) {
            IntVector x(v);
            if (!x.is_zero() && satisfies(hom, x))
                sols.push_back(x);
        });
        std::vector<IntVector> minimal;
        for (const IntVector& x : sols) {
            bool is_min = true;
            for (const IntVector& z : sols)
                if (z != x && x.dominates(z)) {
                    is_min = false;
                    break;
                }
            if (is_min) {
                minimal.push_back(x);
                if (coordinate_sum(x) > bound)
                    f.add(tag + ": minimal solution " + x.to_string() + " above the bound");
            }
        }
        std::vector<IntVector> lib = minimal_homogeneous(hom);
        std::sort(lib.begin(), lib.end());
        std::sort(minimal.begin(), minimal.end());
        if (lib != minimal)
            f.add(tag + ": minimal solutions differ from brute force");
        for (const IntVector& x : sols) {
            if (coordinate_sum(x) > bound * 2)
                continue;
            IntVector total(k);
            for (const IntVector& part : decompose(hom, x)) {
                total += part;
                if (!std::binary_search(minimal.begin(), minimal.end(), part))
                    f.add(tag + ": decomposition uses a non-minimal part");
            }
            if (total != x)
                f.add(tag + ": decomposition of " + x.to_string() + " does not re-sum");
        }

        // inhomogeneous: the box [0,30]^k holds every vector of coordinate sum ≤ 30
        std::optional<Int> best;
        for_each_counts(k, 0, 30, [&](const std::vector<Int>& v) {
            const IntVector x(v);
            if (satisfies(inhom, x) && (!best || coordinate_sum(x) < *best))
                best = coordinate_sum(x);
        });
        const SearchResult r = find_small_solution(inhom);
        const Int cb = corollary_bound(inhom);
        if (r.status == SearchStatus::found) {
            ++inhom_found;
            if (!satisfies(inhom, *r.solution) || coordinate_sum(*r.solution) > cb)
                f.add(tag + ": returned solution invalid or above the bound");
            if (best && *best <= 30 && coordinate_sum(*r.solution) != *best)
                f.add(tag + ": returned solution is not of least coordinate sum");
        } else if (best) {
            f.add(tag + ": a solution exists but none was returned");
        }
    }
    std::ostringstream s;
    s << "200 systems, " << inhom_found << " inhomogeneous solutions, " << f.count << " failures" << f.note();
    return {f.count == 0, s.str()};
}

Result pumping_extractors()
{
    using namespace woca;
    std::mt19937_64 rng(505);
    Failures f;
    std::size_t checked = 0, hills = 0;
    for (int round = 0; round < 20'000 && checked < 200; ++round) {
        const std::size_t states = 1 + rng() % 3;
        const Tvass o = random_oca(rng, states, true);
        const Run run = support::random_run(rng, o, Configuration{StateId{0}, IntVector{0}}, 40 + rng() % 260);
        std::size_t end = 0;
        for (std::size_t i = 0; i < run.configurations.size(); ++i)
            if (run.configurations[i].counters[0] == 0)
                end = i;
        const std::size_t q3 = states * states * states;
        if (end < 2 * q3)
            continue;
        ++checked;
        const Trace pi(run.trace.begin(), run.trace.begin() + static_cast<std::ptrdiff_t>(end));
        const StateId q = run.configurations[end].state;
        const std::string tag = "run " + std::to_string(checked);
        const ShortCycleFactorization s = cut_short_cycles(o, StateId{0}, pi);
        if (!validate_pumping(o, StateId{0}, q, s))
            f.add(tag + ": short cycle pumping fails");
        if (s.beta.size() + s.theta.size() == 0 || s.beta.size() + s.theta.size() > 2 * q3)
            f.add(tag + ": cycle pair length out of range");
        if (s.x + s.d > static_cast<std::int64_t>(2 * states * states))
            f.add(tag + ": x+d too large");
        if (contains_test(o, s.gamma))
            f.add(tag + ": zero-test in gamma");
        for (std::size_t m = 1; m <= 2; ++m) {
            if (pi.size() < m * m * q3)
                continue;
            ++hills;
            const HillFactorization h = hill_cut(o, StateId{0}, pi, m);
            if (h.beta.size() != m || h.concatenated() != pi || !validate_pumping(o, StateId{0}, q, h))
                f.add(tag + ": hill factorization with m=" + std::to_string(m) + " fails");
            for (std::size_t i = 0; i < m; ++i)
                if (h.beta[i].empty() && h.theta[i].empty())
                    f.add(tag + ": empty hill pair");
        }
    }
    std::ostringstream s;
    s << checked << " runs, " << hills << " hill factorizations, " << f.count << " failures" << f.note();
    return {checked >= 200 && f.count == 0, s.str()};
}

Result short_run_bounds()
{
    using namespace woca;
    std::mt19937_64 rng(606);
    Failures f;
    std::size_t runs = 0, mods = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t states = 1 + rng() % 3;
        const Tvass o = random_oca(rng, states, true);
        const StateId p{static_cast<std::uint32_t>(rng() % states)}, q{static_cast<std::uint32_t>(rng() % states)};
        const long long x = rnd(rng, 0, 5), y = rnd(rng, 0, 5);
        const std::string tag = "query " + std::to_string(i);
        const SearchOutcome r = short_run(o, p, x, q, y);
        const bool exists = oca_bfs(o, p, x, 60, 0, [](long long, TransitionId) { return 0; },
                                    [&](StateId s, long long c, long long) { return s == q && c == y; });
        if (r.trace) {
            ++runs;
            if (Int(r.trace->size()) >= short_run_bound(o, x, y))
                f.add(tag + ": short run too long");
            if (apply_trace(o, Configuration{p, IntVector{x}}, *r.trace) != Configuration{q, IntVector{y}})
                f.add(tag + ": short run does not replay");
        } else if (exists) {
            f.add(tag + ": a run exists but none was found");
        }

        std::vector<int> weights(o.transitions().size());
        for (int& wt : weights)
            wt = static_cast<int>(rnd(rng, -1, 1));
        const Woca w(o, weights);
        const long long modulus = rnd(rng, 1, 3), target = rnd(rng, -5, 5);
        const auto mr = run_weight_mod(w, p, q, target, modulus);
        const long long want = ((target % modulus) + modulus) % modulus;
        const bool mod_exists = oca_bfs(
            o, p, 0, 40, 0,
            [&](long long e, TransitionId t) { return (((e + w.weight(t)) % modulus) + modulus) % modulus; },
            [&](StateId s, long long c, long long e) { return s == q && c == 0 && e == want; });
        if (mr) {
            ++mods;
            if (Int(mr->size()) >= Int(modulus * modulus) * power(Int(states), 3))
                f.add(tag + ": weight-mod run too long");
            const Int lw = weight(w, *mr);
            if (apply_trace(o, Configuration{p, IntVector{0}}, *mr) != Configuration{q, IntVector{0}} ||
                ((lw - target) % modulus) != 0)
                f.add(tag + ": weight-mod run invalid");
        } else if (mod_exists) {
            f.add(tag + ": a weight-mod run exists but none was found");
        }
    }
    std::ostringstream s;
    s << "200 queries, " << runs << " short runs, " << mods << " weight-mod runs, " << f.count << " failures" << f.note();
    return {f.count == 0, s.str()};
}

Result weight_certificates()
{
    using namespace woca;
    std::mt19937_64 rng(707);
    Failures f;
    std::size_t instances = 0;
    for (int round = 0; round < 20'000 && instances < 100; ++round) {
        const std::size_t states = 1 + rng() % 3;
        const Tvass o = random_oca(rng, states, true);
        std::vector<int> weights(o.transitions().size());
        for (int& wt : weights)
            wt = static_cast<int>(rnd(rng, -1, 1));
        const Woca w(o, weights);
        const StateId p{static_cast<std::uint32_t>(rng() % states)}, q{static_cast<std::uint32_t>(rng() % states)};
        const long long target = rnd(rng, -10, 10);
        // p(0) reaches q(0) with weight exactly target, and q(0) reaches p(0)
        const bool there = oca_bfs(
            o, p, 0, 20, 0,
            [&](long long e, TransitionId t) { return std::clamp<long long>(e + w.weight(t), -60, 60); },
            [&](StateId s, long long c, long long e) { return s == q && c == 0 && e == target; });
        const bool back = oca_bfs(o, q, 0, 20, 0, [](long long, TransitionId) { return 0; },
                                  [&](StateId s, long long c, long long) { return s == p && c == 0; });
        if (!there || !back)
            continue;
        ++instances;
        const std::string tag = "instance " + std::to_string(instances);
        try {
            const auto cert = lps_weight_certificate(w, p, q, target);
            if (!cert) {
                f.add(tag + ": no certificate");
                continue;
            }
            // replay α·βⁿ and sum weights independently
            const Trace pumped = repeat(cert->beta, static_cast<std::size_t>(cert->n));
            const Trace full = concat({cert->alpha, pumped});
            const auto end = apply_trace(o, Configuration{p, IntVector{0}}, full);
            const auto loop = apply_trace(o, Configuration{q, IntVector{0}}, cert->beta);
            Int total = 0;
            for (TransitionId t : full)
                total += weights[t.value];
            if (end != Configuration{q, IntVector{0}} || total != target || cert->beta.empty() ||
                loop != Configuration{q, IntVector{0}})
                f.add(tag + ": certificate invalid");
        } catch (const std::exception& e) {
            f.add(tag + ": " + e.what());
        }
    }
    std::ostringstream s;
    s << instances << " instances, " << f.count << " failures" << f.note();
    return {instances >= 100 && f.count == 0, s.str()};
}

/// Whether the step graph on a closed set of configurations has a cycle.
bool has_cycle(const Tvass& m, const Closure& cl)
{
    std::map<support::Plain, std::size_t> id;
    for (const auto& c : cl.seen)
        id.emplace(c, id.size());
    std::vector<std::vector<std::size_t>> succ(id.size());
    std::vector<std::size_t> indegree(id.size());
    for (const auto& [c, i] : id) {
        const Configuration conf{StateId{c.first}, IntVector{c.second[0], c.second[1]}};
        for (TransitionId t : m.outgoing(conf.state))
            if (auto next = step(m, conf, t)) {
                const std::size_t j = id.at(plain(*next));
                succ[i].push_back(j);
                ++indegree[j];
            }
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < id.size(); ++i)
        if (indegree[i] == 0)
            ready.push_back(i);
    std::size_t removed = 0;
    while (!ready.empty()) {
        const std::size_t i = ready.back();
        ready.pop_back();
        ++removed;
        for (std::size_t j : succ[i])
            if (--indegree[j] == 0)
                ready.push_back(j);
    }
    return removed < id.size();
}

Result differential_deciders()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(808);
    Failures f;
    std::size_t reach_decided = 0, closed = 0, unbounded = 0, nonterminating = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const std::size_t states = 1 + seed % 4;
        const Tvass m = io::random_instance(seed, states, 1 + static_cast<long long>(seed % 2), 0.3);
        const Configuration from = at(StateId{0}, rnd(rng, 0, 5), rnd(rng, 0, 5));
        const std::string tag = "seed " + std::to_string(seed);

        for (int i = 0; i < 3; ++i) {
            const Configuration to = at(StateId{static_cast<std::uint32_t>(rng() % states)}, rnd(rng, 0, 8), rnd(rng, 0, 8));
            decide::ReachOptions opts;
            opts.cap_norm = 40;
            opts.cap_steps = 100'000;
            const decide::Verdict r = decide::reach(m, from, to, opts);
            const decide::Verdict o = decide::oracle_reach(m, from, to, 40, 100'000);
            if (r.outcome != decide::Outcome::unknown && o.outcome != decide::Outcome::unknown && r.outcome != o.outcome)
                f.add(tag + ": reach and oracle disagree on " + show(from) + " -> " + show(to));
            if (r.outcome == decide::Outcome::yes &&
                !decide::check_certificate(m, from, to, std::get<CountedLps>(r.certificate)))
                f.add(tag + ": reach certificate rejected");
            reach_decided += r.outcome != decide::Outcome::unknown;
        }

        const Closure cl = support::closure(m, from, 1'000'000'000, 100'000);
        decide::BoundOptions bopts;
        bopts.cap_norm = 1'000'000'000;
        bopts.node_budget = 100'001;
        const decide::Verdict b = decide::bounded(m, from, bopts);
        const decide::Verdict t = decide::terminates(m, from, bopts);
        if (b.outcome == decide::Outcome::yes) {
            ++unbounded;
            if (!decide::check_unbounded_witness(m, from, std::get<decide::UnboundedWitness>(b.certificate)))
                f.add(tag + ": pump witness rejected");
        }
        if (t.outcome == decide::Outcome::yes) {
            ++nonterminating;
            const bool ok = std::holds_alternative<decide::Lasso>(t.certificate)
                                ? decide::check_lasso(m, from, std::get<decide::Lasso>(t.certificate))
                                : decide::check_unbounded_witness(m, from, std::get<decide::UnboundedWitness>(t.certificate));
            if (!ok)
                f.add(tag + ": nontermination witness rejected");
        }
        if (cl.closed) {
            ++closed;
            if (b.outcome != decide::Outcome::no || b.reachable_size != cl.seen.size())
                f.add(tag + ": bounded disagrees with a closed enumeration");
            const auto expect = has_cycle(m, cl) ? decide::Outcome::yes : decide::Outcome::no;
            if (t.outcome != expect)
                f.add(tag + ": terminates disagrees with a closed enumeration");
        } else if (b.outcome == decide::Outcome::no) {
            f.add(tag + ": bounded claims a finite set the enumeration could not close");
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream s;
    s << "500 instances, " << reach_decided << "/1500 reach queries decided, " << closed << " closed enumerations, "
      << unbounded << " unbounded, " << nonterminating << " nonterminating, " << f.count << " failures, " << secs << " s"
      << f.note();
    return {f.count == 0 && secs < 300.0, s.str()};
}

Result vloop_factors()
{
    std::mt19937_64 rng(909);
    Failures f;
    std::size_t runs = 0, with_loops = 0;
    while (runs < 300) {
        const std::size_t states = 1 + rng() % 4;
        const Tvass m = support::random_model(rng, states, 2, 0.35, 3 + rng() % 7);
        const Configuration from = at(StateId{0}, 0, rnd(rng, 0, 5));
        const Closure cl = support::closure(m, from, 30, 20'000);
        std::vector<support::Plain> seen(cl.seen.begin(), cl.seen.end());
        const support::Plain& pick = seen[rng() % seen.size()];
        const Configuration to{StateId{pick.first}, IntVector{pick.second[0], pick.second[1]}};
        const decide::Verdict v = decide::oracle_reach(m, from, to, 30, 100'000);
        if (v.outcome != decide::Outcome::yes)
            continue;
        const auto run = replay(m, from, std::get<Trace>(v.certificate));
        if (!run || run->trace.empty())
            continue;
        ++runs;
        const std::string tag = "run " + std::to_string(runs);
        const auto factors = decide::vloop_decompose(m, *run);
        if (factors.size() > 2 * states + 1)
            f.add(tag + ": " + std::to_string(factors.size()) + " factors");
        Trace joined;
        std::size_t expect_begin = 0;
        for (const auto& x : factors) {
            if (x.begin != expect_begin || x.end <= x.begin)
                f.add(tag + ": factors do not tile the run");
            expect_begin = x.end;
            joined.insert(joined.end(), x.trace.begin(), x.trace.end());
            const Configuration& a = run->configurations[x.begin];
            const Configuration& b = run->configurations[x.end];
            switch (x.kind) {
            case decide::FactorKind::segment:
                if (contains_test(m, x.trace))
                    f.add(tag + ": segment with a zero-test");
                break;
            case decide::FactorKind::test:
                if (x.trace.size() != 1 || !m.transition(x.trace[0]).action.is_test())
                    f.add(tag + ": test factor is not one zero-test");
                break;
            case decide::FactorKind::vertical_loop:
                ++with_loops;
                if (a.state != b.state || a.counters[0] != 0 || b.counters[0] != 0)
                    f.add(tag + ": vertical loop ends differ");
                break;
            }
        }
        if (joined != run->trace)
            f.add(tag + ": factors do not concatenate to the run");
    }
    std::ostringstream s;
    s << runs << " runs, " << with_loops << " vertical loops, " << f.count << " failures" << f.note();
    return {f.count == 0, s.str()};
}

Result dx_laws()
{
    std::mt19937_64 rng(1010);
    Failures f;
    std::size_t conclusive = 0, checks = 0;
    std::vector<Tvass> models{support::ex_model()};
    while (models.size() < 21)
        models.push_back(support::random_model(rng, 2 + rng() % 2, 2, 0.3, 4 + rng() % 4));
    bool ex_ok = false;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const Tvass& m = models[mi];
        const StateId q{0};
        // status[x][d]: 1 member, 0 non-member, -1 undecided
        std::vector<std::vector<int>> status(12, std::vector<int>(13, -1));
        for (std::size_t x = 0; x <= 11; ++x) {
            const decide::DxResult r = decide::compute_Dx(m, q, x, 12, 40, 20'000);
            for (std::size_t d : r.members)
                status[x][d] = 1;
            for (std::size_t d : r.non_members)
                status[x][d] = 0;
        }
        for (std::size_t x = 0; x <= 10; ++x)
            for (std::size_t d = 0; d <= 12; ++d) {
                conclusive += status[x][d] != -1;
                if (status[x][d] == 1 && status[x + 1][d] == 0)
                    f.add("model " + std::to_string(mi) + ": D_" + std::to_string(x) + " not in D_" + std::to_string(x + 1));
                ++checks;
                for (std::size_t e = 0; d + e <= 12; ++e)
                    if (status[x][d] == 1 && status[x][e] == 1 && status[x][d + e] == 0)
                        f.add("model " + std::to_string(mi) + ": D_" + std::to_string(x) + " not closed under sums");
            }
        if (mi == 0) {
            std::vector<int> expect;
            for (long long d = 0; d <= 8; ++d)
                expect.push_back(support::ex_closed_form(2, 2 + d) ? 1 : 0);
            ex_ok = std::vector<int>(status[2].begin(), status[2].begin() + 9) == expect &&
                    expect == std::vector<int>{1, 0, 1, 0, 1, 0, 1, 1, 1};
            if (!ex_ok)
                f.add("example model: D_2 on [0,8] is not {0,2,4,6,7,8}");
        }
    }
    std::ostringstream s;
    s << "21 models, " << conclusive << " conclusive entries, " << f.count << " failures" << f.note();
    return {f.count == 0 && ex_ok, s.str()};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Result()> run;
    };
    std::vector<LpsCase> corpus;
    auto corpus_ref = [&]() -> const std::vector<LpsCase>& {
        if (corpus.empty())
            corpus = lps_corpus();
        return corpus;
    };
    const std::vector<Criterion> criteria{
        {"example model against its closed form", golden_closed_form},
        {"example scheme reach and example run", example_scheme},
        {"path and cycle relations against simulation", path_and_cycle_relations},
        {"reversed prefix minimum", reversed_prefix},
        {"inequality system soundness and completeness", [&] { return system_soundness(corpus_ref()); }},
        {"lps_reach completeness", [&] { return lps_reach_completeness(corpus_ref()); }},
        {"small solution bounds", pottier_suite},
        {"pumping extractors", pumping_extractors},
        {"short run bounds", short_run_bounds},
        {"weight certificates", weight_certificates},
        {"differential deciders", differential_deciders},
        {"vertical loop factoring", vloop_factors},
        {"D_x laws", dx_laws},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Result r;
        try {
            r = criteria[i].run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.ok;
        std::printf("criterion %2zu %s: %s (%s) [%.1f s]\n", i + 1, r.ok ? "PASS" : "FAIL", criteria[i].name,
                    r.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
