/**
 *  \file
 *  The command implementations behind the errbound executable. Each command
 *  writes its report to `out`, diagnostics to `err`, and returns the exit
 *  code: 0 success, 1 bad input, 2 numeric failure, 3 inconclusive.
 */
#ifndef ERRBOUND_CLI_COMMANDS_HPP
#define ERRBOUND_CLI_COMMANDS_HPP

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../errbound.hpp"
#include "system_io.hpp"

namespace errbound::cli {

enum exit_code : int { ok = 0, bad_input = 1, numeric = 2, inconclusive_result = 3 };

// ---------------------------------------------------------------------------
// Formatting

/// Shortest decimal that round-trips.
inline std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string fmt(const ext_real& v)
{
    return v.is_infinite() ? std::string("inf") : fmt(v.value());
}

inline std::string fmt(const vec& v)
{
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt(v[i]);
    }
    return s + ")";
}

inline std::string fmt_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt(v[i]);
    }
    return s;
}

inline std::string fmt_labels(const std::vector<std::string>& labels)
{
    std::string s = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) s += ",";
        s += labels[i];
    }
    return s + "}";
}

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

/// Parses "1,2.5,-3" into a vector.
inline vec parse_coords(const std::string& text)
{
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            fail(errc::invalid_input, "bad coordinate list '" + text + "'");
        }
        if (used != item.size()) fail(errc::invalid_input, "bad coordinate list '" + text + "'");
        vals.push_back(v);
    }
    if (vals.empty()) fail(errc::invalid_input, "empty coordinate list");
    return Eigen::Map<vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

/// Cap from ERRBOUND_THREADS. The kernels run sequentially, so any valid
/// value is accepted and only malformed values are rejected.
inline std::size_t thread_cap()
{
    const char* env = std::getenv("ERRBOUND_THREADS");
    if (!env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) fail(errc::invalid_input, "ERRBOUND_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------------------
// Inputs

struct source
{
    std::optional<std::string> path;
    std::optional<std::string> function;
};

struct loaded
{
    convex_function f;
    std::string description;
};

inline loaded load_source(const source& src)
{
    if (src.path.has_value() == src.function.has_value()) {
        fail(errc::invalid_input, "give exactly one of a spec path or --function");
    }
    if (src.path) {
        auto sys = load_system(*src.path);
        std::string d = *src.path + " (" + std::to_string(sys.size()) + " rows, dim " + std::to_string(sys.dim()) +
                        ", norm " + std::string(to_string(sys.norm())) + ")";
        return {convex_function::from_system(std::move(sys), *src.path), d};
    }
    const auto which = parse_named_scalar(*src.function);
    if (!which) fail(errc::invalid_input, "unknown function '" + *src.function + "' (exp_minus_one, zero, abs)");
    return {convex_function::named(*which), "function " + *src.function};
}

inline vec point_for(const convex_function& f, const std::string& coords)
{
    vec x = parse_coords(coords);
    if (x.size() != f.dim()) {
        fail(errc::invalid_input, "point has " + std::to_string(x.size()) + " coordinates, expected " +
                                      std::to_string(f.dim()));
    }
    return x;
}

/// Runs `body`, mapping library errors onto exit codes.
inline int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.code()) {
            case errc::invalid_input: return bad_input;
            case errc::numeric_failure: return numeric;
            case errc::not_applicable: return numeric;
            case errc::inconclusive: return inconclusive_result;
        }
        return numeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return numeric;
    }
}

// ---------------------------------------------------------------------------
// hoffman

struct hoffman_options
{
    std::string path;
    std::size_t max_size = 0;
    std::vector<double> sweep;
    std::vector<std::string> anchors;     ///< coordinate lists; empty means catalog witnesses
    std::vector<std::string> directions;  ///< coordinate lists; empty means the default set
    std::size_t random_directions = 2;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    std::vector<double> radii{1.0, 10.0, 100.0};
    std::optional<std::string> out;
};

inline void write_sweep_csv(std::ostream& os, const sweep_result& s)
{
    os << "eps,anchor_id,direction_id,lower_bound,sigma_sampled\n";
    for (const auto& c : s.cells) {
        os << format_real(c.eps) << ',' << c.anchor_id << ',' << c.direction_id << ',';
        if (c.error) {
            os << "nan,nan\n";
        } else {
            os << format_real(c.lower_bound) << ',' << format_real(c.sigma_sampled) << '\n';
        }
    }
}

inline int run_hoffman(const hoffman_options& o, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        thread_cap();
        const auto sys = load_system(o.path);
        ERRBOUND_REQUIRE(o.max_size <= sys.size(), "--max-size exceeds the number of rows");
        sampler_spec sampler;
        sampler.seed = o.seed;
        sampler.count = o.samples;
        sampler.radii = o.radii;

        std::optional<sweep_spec> sweep;
        if (!o.sweep.empty()) {
            sweep_spec s;
            s.eps = o.sweep;
            for (double e : s.eps) ERRBOUND_REQUIRE(e >= 0 && std::isfinite(e), "--sweep values must be >= 0");
            for (const auto& a : o.anchors) {
                vec x = parse_coords(a);
                ERRBOUND_REQUIRE(x.size() == sys.dim(), "--anchor has the wrong dimension");
                s.anchors.push_back(x);
            }
            for (const auto& d : o.directions) {
                vec u = parse_coords(d);
                ERRBOUND_REQUIRE(u.size() == sys.dim(), "--direction has the wrong dimension");
                s.directions.push_back(u);
            }
            s.random_directions = o.random_directions;
            s.seed = o.seed;
            s.sampler = sampler;
            sweep = s;
        }

        const auto r = hoffman_analyze(sys, o.max_size, sampler, sweep);

        out << "errbound hoffman\n";
        out << "input: " << o.path << " (" << sys.size() << " rows, dim " << sys.dim() << ", norm "
            << to_string(sys.norm()) << ")\n";
        out << "config: seed=" << o.seed << " samples=" << o.samples << " radii=" << fmt_list(o.radii)
            << " max_size=" << r.catalog.max_size_searched << " margin_tol=1e-09 box=1e+06\n";
        for (const auto& w : r.catalog.warnings) out << "warning: " << w << "\n";
        out << "active sets: " << r.catalog.sets.size() << "\n";
        for (const auto& e : r.catalog.sets) {
            out << "  J=" << fmt_labels(e.labels) << " witness=" << fmt(e.witness) << " op=" << fmt(e.op.value)
                << " argmin=" << fmt(e.op.argmin) << " method=" << to_string(e.op.method)
                << " certified=" << yes_no(e.op.certified) << "\n";
        }
        out << "lower_bound: " << fmt(r.lower_bound.value) << " certified=" << yes_no(r.lower_bound.certified);
        if (r.lower_bound.attained_at) out << " at J=" << fmt_labels(r.catalog.sets[*r.lower_bound.attained_at].labels);
        out << "\n";
        out << "sigma_sampled: " << fmt(r.sigma_sampled.value) << " infeasible_samples=" << r.sigma_sampled.sample_count
            << " stabilized=" << yes_no(r.sigma_sampled.stabilized);
        if (r.sigma_sampled.witness) out << " witness=" << fmt(*r.sigma_sampled.witness);
        out << "\n";
        for (const auto& n : r.sigma_sampled.notes) out << "note: " << n << "\n";
        out << "verdict: " << to_string(r.stability) << "\n";

        if (r.sweep) {
            const auto& s = *r.sweep;
            out << "sweep: " << s.summary.size() << " eps x " << s.anchors.size() << " anchors x "
                << s.directions.size() << " directions\n";
            for (std::size_t i = 0; i < s.anchors.size(); ++i) out << "  anchor " << i << ": " << fmt(s.anchors[i]) << "\n";
            for (std::size_t i = 0; i < s.directions.size(); ++i) out << "  direction " << i << ": " << fmt(s.directions[i]) << "\n";
            for (const auto& c : s.cells) {
                if (c.error) out << "  cell eps=" << fmt(c.eps) << " anchor=" << c.anchor_id << " direction=" << c.direction_id
                                 << " failed: " << *c.error << "\n";
            }
            for (const auto& m : s.summary) {
                out << "  eps=" << fmt(m.eps) << " min_lower_bound=" << fmt(m.min_lower_bound)
                    << " min_sigma_sampled=" << fmt(m.min_sigma_sampled) << " failed_cells=" << m.failed_cells << "\n";
            }
            if (o.out) {
                std::ofstream csv(*o.out, std::ios::binary);
                if (!csv) fail(errc::invalid_input, "cannot write '" + *o.out + "'");
                write_sweep_csv(csv, s);
                out << "csv: " << *o.out << "\n";
            } else {
                write_sweep_csv(out, s);
            }
        }
        return r.stability == verdict::inconclusive ? inconclusive_result : ok;
    });
}

// ---------------------------------------------------------------------------
// phi

struct phi_options
{
    source src;
    std::string at;
};

inline int run_phi(const phi_options& o, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        thread_cap();
        const auto in = load_source(o.src);
        const vec x = point_for(in.f, o.at);
        const auto p = phi(in.f, x);
        out << "errbound phi\n";
        out << "input: " << in.description << "\n";
        out << "at: " << fmt(x) << "\n";
        out << "f: " << fmt(in.f(x)) << "\n";
        if (const auto* sys = in.f.system()) out << "active_set: " << fmt_labels(active_set(*sys, x)) << "\n";
        out << "phi: " << fmt(p.value) << "\n";
        out << "argmin: " << fmt(p.argmin) << "\n";
        out << "method: " << to_string(p.method) << "\n";
        out << "certified: " << yes_no(p.certified) << "\n";
        return ok;
    });
}

// ---------------------------------------------------------------------------
// modulus

struct modulus_options
{
    source src;
    bool local = false;
    std::optional<std::string> at;   ///< anchor (local) or sampling center (global)
    std::vector<double> radii;       ///< empty: 1,10,100 (global) or 0.1,0.01,0.001 (local)
    std::optional<std::size_t> samples;
    std::uint64_t seed = 1;
};

inline void print_estimate(std::ostream& out, const modulus_estimate& e)
{
    out << "route " << to_string(e.route) << ": value=" << fmt(e.value) << " infeasible_samples=" << e.sample_count
        << " stabilized=" << yes_no(e.stabilized) << " certified=" << yes_no(e.certified);
    if (e.witness) out << " witness=" << fmt(*e.witness);
    out << "\n";
    for (const auto& s : e.shells) {
        out << "  radius=" << fmt(s.radius) << " value=" << fmt(s.value) << " infeasible=" << s.infeasible_samples << "\n";
    }
    std::vector<std::string> seen;
    for (const auto& n : e.notes) {
        if (std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
        seen.push_back(n);
        out << "  note: " << n << "\n";
    }
}

inline int run_modulus(const modulus_options& o, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        thread_cap();
        const auto in = load_source(o.src);
        modulus_estimate direct, primal;
        std::vector<double> radii = o.radii;
        std::size_t samples = 0;
        if (o.local) {
            ERRBOUND_REQUIRE(o.at.has_value(), "--local needs --at");
            const vec x = point_for(in.f, *o.at);
            local_sampler_spec spec;
            spec.seed = o.seed;
            if (!radii.empty()) spec.radii = radii;
            if (o.samples) spec.count = *o.samples;
            radii = spec.radii;
            samples = spec.count;
            auto r = local_modulus(in.f, x, spec);
            direct = std::move(r.direct);
            primal = std::move(r.primal);
        } else {
            sampler_spec spec;
            spec.seed = o.seed;
            if (!radii.empty()) spec.radii = radii;
            if (o.samples) spec.count = *o.samples;
            if (o.at) spec.center = point_for(in.f, *o.at);
            radii = spec.radii;
            samples = spec.count;
            direct = global_modulus_direct(in.f, spec);
            primal = global_modulus_primal(in.f, spec);
        }
        out << "errbound modulus\n";
        out << "input: " << in.description << "\n";
        out << "kind: " << (o.local ? "local" : "global");
        if (o.at) out << " at=" << fmt(point_for(in.f, *o.at));
        out << "\n";
        out << "config: seed=" << o.seed << " samples=" << samples << " radii=" << fmt_list(radii) << "\n";
        print_estimate(out, direct);
        print_estimate(out, primal);
        out << "agreement_gap: ";
        if (direct.value.is_infinite() || primal.value.is_infinite()) {
            out << (direct.value == primal.value ? "0" : "inf");
        } else {
            const double a = direct.value.value(), b = primal.value.value();
            const double scale = std::max(std::abs(a), std::abs(b));
            out << fmt(std::abs(a - b)) << " relative=" << fmt(scale > 0 ? std::abs(a - b) / scale : 0.0);
        }
        out << "\n";
        return ok;
    });
}

// ---------------------------------------------------------------------------
// stability

struct stability_options
{
    source src;
    std::optional<std::string> at;
    bool global = false;
    std::optional<double> tau;
    double eps = 0.1;
};

inline void print_certificate(std::ostream& out, const stability_certificate& c)
{
    out << "scope: " << to_string(c.scope) << "\n";
    out << "verdict: " << to_string(c.result) << "\n";
    out << "tau: " << fmt(c.tau) << "\n";
    out << (c.scope == stability_scope::point ? "phi_at_anchor: " : "min_phi_over_boundary: ") << fmt(c.phi_value) << "\n";
    out << "certified: " << yes_no(c.certified) << "\n";
    for (const auto& w : c.witnesses) {
        out << "witness: point=" << fmt(w.point) << " phi=" << fmt(w.phi);
        if (w.tilt_direction) out << " direction=" << fmt(*w.tilt_direction);
        out << "\n";
    }
    for (const auto& n : c.notes) out << "note: " << n << "\n";
}

inline void print_destabilizer(std::ostream& out, const destabilizer& d, double eps)
{
    out << "destabilizer: eps=" << fmt(eps) << " anchor=" << fmt(d.anchor) << " functional=" << fmt(d.functional) << "\n";
    if (const auto* sys = d.g.system()) {
        for (const auto& r : sys->rows()) out << "  g row " << r.label << ": a=" << fmt(r.a) << " b=" << fmt(r.b) << "\n";
    }
    out << "  witness=" << fmt(d.witness) << " g(witness)=" << fmt(d.g(d.witness)) << " phi_g=" << fmt(d.phi_g) << "\n";
    out << "  perturbed modulus bound (-phi_g): " << fmt(-d.phi_g) << " guarantee=" << fmt(d.guarantee) << "\n";
    if (d.sampled_ratio) out << "  sampled ratio g/d at witness: " << fmt(*d.sampled_ratio) << "\n";
}

inline int run_stability(const stability_options& o, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        thread_cap();
        const auto in = load_source(o.src);
        ERRBOUND_REQUIRE(o.global != o.at.has_value(), "give exactly one of --at or --global");
        ERRBOUND_REQUIRE(o.eps > 0 && std::isfinite(o.eps), "--eps must be positive");
        out << "errbound stability\n";
        out << "input: " << in.description << "\n";
        out << "config: eps=" << fmt(o.eps);
        if (o.tau) out << " tau=" << fmt(*o.tau);
        out << "\n";

        if (!o.global) {
            const vec x = point_for(in.f, *o.at);
            out << "at: " << fmt(x) << "\n";
            const auto c = point_stability(in.f, x, o.tau);
            print_certificate(out, c);
            if (c.result == verdict::unstable) print_destabilizer(out, destabilize_at(in.f, x, o.eps), o.eps);
            return c.result == verdict::inconclusive ? inconclusive_result : ok;
        }

        const auto g = global_stability(in.f, o.tau);
        print_certificate(out, g.certificate);
        out << "boundary condition: tau=" << fmt(g.boundary.tau) << " exact=" << yes_no(g.boundary.exact)
            << " certified=" << yes_no(g.boundary.certified);
        if (g.boundary.witness) out << " at=" << fmt(*g.boundary.witness);
        out << "\n";
        out << "interior slope condition: " << (g.interior.holds ? "holds" : "refuted")
            << " tau=" << fmt(g.interior.tau) << (g.interior.vacuous ? " (vacuous: no interior point)" : "")
            << (g.interior.sampled ? " (sampled necessary check)" : "") << "\n";
        for (const auto& t : g.interior.tiers) {
            out << "  slope<=" << fmt(t.cap) << " pairs=" << t.pairs << " min_abs_phi=" << fmt(t.min_abs_phi);
            if (t.z) out << " z=" << fmt(*t.z) << " x=" << fmt(*t.x) << " slope=" << fmt(t.slope);
            out << "\n";
        }
        if (g.certificate.result == verdict::unstable) {
            if (g.boundary.tau <= phi_zero_tolerance(in.f)) {
                print_destabilizer(out, destabilize_at(in.f, *g.boundary.witness, o.eps), o.eps);
            } else {
                print_destabilizer(out, destabilize_along_sequence(in.f, o.eps), o.eps);
            }
        }
        return g.certificate.result == verdict::inconclusive ? inconclusive_result : ok;
    });
}

// ---------------------------------------------------------------------------
// oracle-check

struct oracle_check_options
{
    std::string path;
    std::uint64_t seed = 1;
    std::size_t points = 200;
    double radius = 10.0;
    double tol = 1e-3;
};

inline int run_oracle_check(const oracle_check_options& o, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        thread_cap();
        const auto sys = load_system(o.path);
        ERRBOUND_REQUIRE(sys.dim() <= 3, "oracle-check needs dim <= 3");
        const auto f = convex_function::from_system(sys);
        const auto cat = enumerate_active_sets(sys);
        const double scale = 1.0 + sys.max_gradient_norm();

        struct tally
        {
            std::string name;
            double max_gap = 0.0;
            std::size_t cases = 0;
            std::string worst;
        };
        std::vector<tally> checks(4);
        checks[0].name = "min_norm_point";
        checks[1].name = "sphere_min_over_set";
        checks[2].name = "project_polyhedron";
        checks[3].name = "phi";
        auto record = [](tally& t, double gap, const std::string& what) {
            ++t.cases;
            if (gap > t.max_gap || t.worst.empty()) {
                t.max_gap = std::max(t.max_gap, gap);
                t.worst = what;
            }
        };

        std::vector<std::vector<vec>> sets;
        std::vector<std::string> names;
        for (const auto& e : cat.sets) {
            std::vector<vec> g;
            for (auto i : e.indices) g.push_back(sys.rows()[i].a);
            sets.push_back(g);
            names.push_back("J=" + fmt_labels(e.labels));
        }
        {
            std::vector<vec> all;
            for (const auto& r : sys.rows()) all.push_back(r.a);
            sets.push_back(all);
            names.push_back("all rows");
        }
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const double k = min_norm_point(sets[i]).distance;
            const double b = oracle::brute_min_norm_distance(sets[i]);
            record(checks[0], std::abs(k - b), names[i] + " kernel=" + fmt(k) + " oracle=" + fmt(b));
            if (sys.norm() == norm_kind::euclidean) {
                const double ks = sphere_min_over_set(sets[i], sys.norm()).value;
                const double bs = oracle::brute_sphere_min(sets[i]).value;
                record(checks[1], std::abs(ks - bs), names[i] + " kernel=" + fmt(ks) + " oracle=" + fmt(bs));
            }
        }

        std::vector<vec> a;
        std::vector<double> b;
        for (const auto& r : sys.rows()) {
            a.push_back(r.a);
            b.push_back(r.b);
        }
        const auto poly = sys.level_set();
        std::mt19937_64 rng(o.seed);
        const vec origin = vec::Zero(sys.dim());
        for (std::size_t i = 0; i < o.points; ++i) {
            const vec x = random_in_ball(origin, o.radius, rng);
            const auto k = project_polyhedron(x, poly).distance;
            const auto q = oracle::brute_distance(x, a, b).distance;
            const double gap = (k.is_infinite() || q.is_infinite()) ? (k == q ? 0.0 : HUGE_VAL)
                                                                    : std::abs(k.value() - q.value());
            record(checks[2], gap, "x=" + fmt(x) + " kernel=" + fmt(k) + " oracle=" + fmt(q));
            if (i < 50) {
                const double kp = phi(f, x).value;
                const double qp = phi_grid_oracle(f, x).value;
                record(checks[3], std::abs(kp - qp) / scale, "x=" + fmt(x) + " kernel=" + fmt(kp) + " oracle=" + fmt(qp));
            }
        }
        for (const auto& e : cat.sets) {
            const double kp = e.op.value;
            const double qp = phi_grid_oracle(f, e.witness).value;
            record(checks[3], std::abs(kp - qp) / scale, "witness " + fmt(e.witness) + " kernel=" + fmt(kp) + " oracle=" + fmt(qp));
        }

        out << "errbound oracle-check\n";
        out << "input: " << o.path << " (" << sys.size() << " rows, dim " << sys.dim() << ", norm " << to_string(sys.norm())
            << ")\n";
        out << "config: seed=" << o.seed << " points=" << o.points << " radius=" << fmt(o.radius) << " tol=" << fmt(o.tol)
            << "\n";
        if (sys.norm() != norm_kind::euclidean) out << "note: sphere oracle is Euclidean only; sphere check skipped\n";
        bool pass = true;
        for (const auto& t : checks) {
            const bool good = t.max_gap <= o.tol;
            pass = pass && good;
            out << t.name << ": cases=" << t.cases << " max_discrepancy=" << fmt(t.max_gap) << " " << (good ? "PASS" : "FAIL")
                << "\n";
            if (!good) out << "  failing case: " << t.worst << "\n";
        }
        out << "result: " << (pass ? "pass" : "fail") << "\n";
        return pass ? ok : numeric;
    });
}

} // namespace errbound::cli

#endif
