#include "shs/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shs/deterministic.hpp"

namespace shs {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const Scenario& s, const std::string& command,
              const std::vector<std::string>& notes = {})
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << "# command=" << command << "\n# scenario_hash=" << scenario_hash(s)
             << "\n# master_seed=" << s.master_seed << "\n";
        for (const auto& n : notes) out_ << "# " << n << "\n";
    }
    void header(const std::vector<std::string>& cols) { row_text(cols); }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
        out_ << "\n";
    }
    void row_text(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

bool wants(const Scenario& s, const std::string& format) {
    return std::find(s.formats.begin(), s.formats.end(), format) != s.formats.end();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

std::size_t nearest_node(const TimeGrid& g, double t) {
    return std::min(g.n_steps, static_cast<std::size_t>(std::llround(t / g.dt())));
}

std::vector<double> snapshot_times(const Scenario& s) {
    if (!s.times.empty()) return s.times;
    std::vector<double> t;
    for (int i = 0; i <= 4; ++i) t.push_back(s.grid.t_end * i / 4.0);
    return t;
}

std::vector<double> law_q0(const Scenario& s) {
    if (!s.law_q0.empty()) return s.law_q0;
    std::vector<double> q;
    for (double v : s.initial.values)
        if (v < 0.0 && std::find(q.begin(), q.end(), v) == q.end()) q.push_back(v);
    return q;
}

int cmd_simulate(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    (void)opt;
    const BrownianPath path = sample_brownian(s.grid, path_seed(s.master_seed, 0));
    const CharacteristicField f = build_field(path, s.sigma, s.initial, s.mode);
    if (!wants(s, "csv")) return kExitOk;
    CsvWriter pw(dir / "path.csv", s, "simulate");
    pw.header({"t", "W", "Z", "A"});
    for (std::size_t k = 0; k < s.grid.n_nodes(); ++k) pw.row({s.grid.time(k), path.w[k], f.expf.z[k], f.expf.a[k]});
    std::vector<std::string> notes;
    for (std::size_t i = 0; i < f.n_boxes(); ++i)
        notes.push_back("t_star_" + std::to_string(i) + "=" + format_number(f.t_star[i].value));
    CsvWriter w(dir / "simulate.csv", s, "simulate", notes);
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < f.n_boxes(); ++i)
        for (const char* n : {"Q_", "u_", "dxdx_"}) cols.push_back(n + std::to_string(i));
    for (std::size_t i = 0; i <= f.n_boxes(); ++i) cols.push_back("X_" + std::to_string(i));
    w.header(cols);
    for (std::size_t k = 0; k < s.grid.n_nodes(); ++k) {
        std::vector<double> r{s.grid.time(k)};
        for (std::size_t i = 0; i < f.n_boxes(); ++i) {
            r.push_back(f.q_lag[i][k]);
            r.push_back(f.u_frak[i][k]);
            r.push_back(f.dxdx[i][k]);
        }
        for (std::size_t i = 0; i <= f.n_boxes(); ++i) r.push_back(f.X[i][k]);
        w.row(r);
    }
    log << "simulate: " << s.grid.n_nodes() << " nodes, " << f.n_boxes() << " boxes\n";
    return kExitOk;
}

int cmd_ensemble(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    const std::size_t stride = std::max<std::size_t>(1, (s.grid.n_nodes() + 199) / 200);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < s.grid.n_nodes(); k += stride) nodes.push_back(k);
    if (nodes.back() != s.grid.n_steps) nodes.push_back(s.grid.n_steps);
    const std::vector<std::string> names{"energy", "eulerian_energy", "Z", "A", "u_right", "support_width",
                                         "broken_fraction"};
    std::vector<std::vector<std::vector<double>>> values(
        names.size(), std::vector<std::vector<double>>(nodes.size(), std::vector<double>(s.n_paths)));
    parallel_for(s.n_paths, opt.threads, [&](std::size_t p) {
        const BrownianPath path = sample_brownian(s.grid, path_seed(s.master_seed, p));
        const CharacteristicField f = build_field(path, s.sigma, s.initial, s.mode);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const std::size_t k = nodes[j];
            const double t = s.grid.time(k);
            double broken = 0.0;
            for (const auto& ts : f.t_star) broken += ts.value <= t ? 1.0 : 0.0;
            const double row[] = {energy(f, k),
                                  eulerian_energy(f, k),
                                  f.expf.z[k],
                                  f.expf.a[k],
                                  f.cumulative_u(k).back(),
                                  f.X.back()[k] - f.X.front()[k],
                                  broken / static_cast<double>(f.n_boxes())};
            for (std::size_t o = 0; o < names.size(); ++o) values[o][j][p] = row[o];
        }
    });
    std::vector<double> t;
    for (std::size_t k : nodes) t.push_back(s.grid.time(k));
    const EnsembleStats st = summarize(t, names, values);
    if (wants(s, "csv")) {
        CsvWriter w(dir / "ensemble.csv", s, "ensemble", {"n_paths=" + std::to_string(st.n_paths)});
        std::vector<std::string> cols{"t"};
        for (const auto& n : names) {
            cols.push_back(n + "_mean");
            cols.push_back(n + "_stderr");
        }
        w.header(cols);
        for (std::size_t j = 0; j < t.size(); ++j) {
            std::vector<double> r{t[j]};
            for (std::size_t o = 0; o < names.size(); ++o) {
                r.push_back(st.mean[o][j]);
                r.push_back(st.stderr_[o][j]);
            }
            w.row(r);
        }
    }
    log << "ensemble: " << s.n_paths << " paths, " << t.size() << " output nodes\n";
    return kExitOk;
}

int cmd_law(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    const std::vector<double> q0 = law_q0(s);
    std::vector<double> times = s.times.empty() ? std::vector<double>{0.5, 1.0, 2.0, 4.0} : s.times;
    times.erase(std::remove_if(times.begin(), times.end(), [&](double t) { return !(t > 0.0 && t <= s.grid.t_end); }),
                times.end());
    std::vector<std::string> notes;
    std::vector<std::vector<double>> rows;
    for (double q : q0) {
        for (double t : times) {
            double analytic = std::numeric_limits<double>::quiet_NaN();
            if (q >= 0.0) {
                analytic = 1.0;
            } else if (s.sigma.slope == 0.0) {
                analytic = t <= -2.0 / q ? 1.0 : 0.0;
            } else {
                try {
                    analytic = breaking_cdf(t, q, s.sigma.slope);
                } catch (const SmallTimeRefusal& e) {
                    notes.push_back("q0=" + format_number(q) + " t=" + format_number(t) + ": " + e.what());
                }
            }
            const McEstimate mc =
                mc_breaking_cdf(t, q, s.sigma.slope, s.n_paths, s.master_seed, {s.grid.dt(), opt.threads});
            rows.push_back({q, t, analytic, mc.p, mc.stderr_});
        }
    }
    if (wants(s, "csv")) {
        CsvWriter w(dir / "law.csv", s, "law", notes);
        w.header({"q0", "t", "analytic_cdf", "mc_cdf", "mc_stderr"});
        for (const auto& r : rows) w.row(r);
    }
    log << "law: " << rows.size() << " rows\n";
    return kExitOk;
}

int cmd_slice(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    (void)opt;
    const BrownianPath path = sample_brownian(s.grid, path_seed(s.master_seed, 0));
    const CharacteristicField f = build_field(path, s.sigma, s.initial, s.mode);
    if (wants(s, "csv")) {
        CsvWriter w(dir / "slice.csv", s, "slice");
        w.header({"t", "x", "q", "u", "box"});
        for (double t : snapshot_times(s)) {
            const EulerianSlice sl = eulerian_slice(f, nearest_node(s.grid, t));
            for (std::size_t j = 0; j < sl.x.size(); ++j)
                w.row({sl.t, sl.x[j], sl.q[j], sl.u[j], static_cast<double>(sl.box[j])});
        }
    }
    log << "slice: " << snapshot_times(s).size() << " snapshots\n";
    return kExitOk;
}

int cmd_deterministic(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    (void)opt;
    const std::vector<double> times = snapshot_times(s);
    if (wants(s, "csv")) {
        CsvWriter w(dir / "deterministic.csv", s, "deterministic", {"mode=" + to_string(s.mode)});
        w.header({"t", "x", "q", "u", "box"});
        for (double t : times) {
            const EulerianSlice sl = det_solution(s.initial, t, s.mode);
            for (std::size_t j = 0; j < sl.x.size(); ++j)
                w.row({t, sl.x[j], sl.q[j], sl.u[j], static_cast<double>(sl.box[j])});
        }
    }
    if (wants(s, "json")) {
        json ledger = json::array();
        for (double t : times) {
            const DefectLedger led = defect_ledger(s.initial, t);
            json atoms = json::array();
            for (const auto& a : led.atoms)
                atoms.push_back({{"box", a.box}, {"t_break", a.t_break}, {"mass", a.mass}, {"position", a.position}});
            ledger.push_back({{"t", t},
                              {"total", led.total},
                              {"energy", det_energy(s.initial, t, ContinuationMode::Dissipative)},
                              {"atoms", atoms}});
        }
        write_json(dir / "ledger.json",
                   {{"scenario_hash", scenario_hash(s)}, {"master_seed", s.master_seed}, {"ledger", ledger}});
    }
    log << "deterministic: " << times.size() << " snapshots\n";
    return kExitOk;
}

int cmd_verify(const Scenario& s, const RunOptions& opt, const fs::path& dir, std::ostream& log) {
    const std::vector<CheckResult> checks = verification_suite(s, opt.threads);
    bool all = true;
    json arr = json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        log << (c.pass ? "PASS " : "FAIL ") << c.name << "  statistic=" << format_number(c.statistic)
            << " tolerance=" << format_number(c.tolerance) << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
        arr.push_back({{"check", c.name},
                       {"statistic", std::isfinite(c.statistic) ? json(c.statistic) : json(format_number(c.statistic))},
                       {"tolerance", c.tolerance},
                       {"verdict", c.pass ? "pass" : "fail"},
                       {"detail", c.detail}});
    }
    if (wants(s, "json"))
        write_json(dir / "verify.json", {{"scenario_hash", scenario_hash(s)},
                                         {"master_seed", s.master_seed},
                                         {"checks", arr},
                                         {"pass", all}});
    return all ? kExitOk : kExitCheckFailed;
}

std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += std::string(out.empty() ? "" : " ") + k + "=" + format_number(v);
    return out;
}

}  // namespace

std::string prepare_output(const Scenario& s, const RunOptions& opt) {
    const fs::path dir = opt.out_dir.empty() ? fs::path(s.out_dir) : fs::path(opt.out_dir);
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw OutputCollision("output path '" + dir.string() + "' is not a directory");
        if (!fs::is_empty(dir) && !opt.force)
            throw OutputCollision("output directory '" + dir.string() + "' is not empty (use --force)");
    }
    fs::create_directories(dir);
    Scenario resolved = s;
    resolved.out_dir = dir.string();
    write_json(dir / "scenario.json", scenario_to_json(resolved));
    return dir.string();
}

int run_command(const std::string& command, const Scenario& s, const RunOptions& opt, std::ostream& log) {
    using Fn = int (*)(const Scenario&, const RunOptions&, const fs::path&, std::ostream&);
    static const std::vector<std::pair<std::string, Fn>> table{
        {"simulate", cmd_simulate}, {"ensemble", cmd_ensemble},           {"law", cmd_law},
        {"slice", cmd_slice},       {"deterministic", cmd_deterministic}, {"verify", cmd_verify},
    };
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == command; });
    if (it == table.end()) throw std::invalid_argument("unknown command '" + command + "'");
    const std::string dir = prepare_output(s, opt);
    return it->second(s, opt, dir, log);
}

std::vector<CheckResult> verification_suite(const Scenario& s, unsigned threads) {
    std::vector<CheckResult> out;
    const double sp = s.sigma.slope;
    const Experiment base = s.experiment(threads);
    auto capped = [&](std::size_t n) {
        Experiment e = base;
        e.n_paths = std::min(e.n_paths, n);
        return e;
    };

    {
        const StepInitialData box = StepInitialData::box(-1.0, 0.0, 1.0);
        double dev = std::abs(det_breaking_time(-1.0) - 2.0) + std::abs(det_q(-1.0, 1.0, s.mode) + 2.0);
        for (double t : {0.0, 1.0, 3.0}) {
            dev = std::max(dev, std::abs(det_energy(box, t, ContinuationMode::Conservative) - 1.0));
            dev = std::max(dev, std::abs(det_energy(box, t, ContinuationMode::Dissipative) +
                                         defect_ledger(box, t).total - 1.0));
        }
        out.push_back({"deterministic_box_regression", dev, 1e-12, dev <= 1e-12, ""});
    }
    {
        const TimeGrid g{s.grid.t_end, std::min<std::size_t>(s.grid.n_steps, 1000)};
        const SigmaZeroReport r = sigma_zero_consistency(s.initial, g, 1e-10, s.master_seed);
        out.push_back({"sigma_zero_consistency", std::max(r.zero_path, r.shifted), r.tol, r.pass(),
                       describe({{"tiny_slope", r.tiny_slope}})});
    }
    {
        const EnergyIdentityReport r = energy_identity_check(capped(100));
        out.push_back({"pathwise_energy_identity", r.worst, 1e-10, r.worst <= 1e-10,
                       describe({{"singular_nodes_skipped", static_cast<double>(r.singular_skipped)}})});
    }
    {
        Experiment e = base;
        e.mode = ContinuationMode::Conservative;
        e.grid = {s.grid.t_end, std::min<std::size_t>(s.grid.n_steps, 400)};
        const EnergyLawReport r = expected_energy_check(e, {e.grid.t_end}, EnergyGrowthLaw::GaussianMoment);
        const EnergyPoint& p = r.points.back();
        out.push_back({"expected_energy_gaussian_moment", std::abs(p.z), 3.0, r.law_pass,
                       describe({{"t", p.t}, {"mean", p.estimate.mean}, {"target", p.target}})});
        const double worst_z = std::max({std::abs(r.log_mean_z), std::abs(r.log_var_z), std::abs(r.skew_z),
                                         std::abs(r.kurt_z)});
        out.push_back({"lognormal_log_energy_moments", worst_z, 3.0, r.lognormal_pass, ""});
    }
    const std::vector<double> q0 = law_q0(s);
    YorQuadratureParams yp;
    if (sp != 0.0 && !q0.empty() && 4.0 * yp.min_t / (sp * sp) < s.grid.t_end) {
        const KsReport r = breaking_law_ks(sp, q0, s.grid, s.n_paths, s.master_seed, threads, 0.01, yp, 24);
        double worst = 0.0;
        bool pass = true;
        for (const auto& e : r.entries) {
            worst = std::max(worst, e.distance);
            pass = pass && e.pass();
        }
        out.push_back({"breaking_time_law_ks", worst, r.entries.front().critical, pass,
                       describe({{"lo", r.lo}, {"hi", r.hi}, {"table_error", r.table_error}})});
    }
    if (s.initial.n_boxes() == 1 && s.initial.values[0] < 0.0) {
        const MeetingReport r = meeting_time_check(capped(1000));
        out.push_back({"meeting_equals_breaking", r.max_deviation, r.dt, r.pass(),
                       describe({{"broken", static_cast<double>(r.n_broken)}, {"fail", static_cast<double>(r.n_fail)}})});
    }
    {
        Experiment e = capped(200);
        e.grid = {s.grid.t_end, std::max<std::size_t>(1, s.grid.n_steps / 4)};
        const double lo = s.initial.breakpoints.front(), hi = s.initial.breakpoints.back();
        const TestFunction phi{0.5 * (lo + hi), hi - lo};
        const WeakFormConvergence r = weak_form_convergence(e, phi, 3);
        out.push_back({"weak_form_residual_rate", r.rate, 0.5, r.pass(),
                       describe({{"gap_ok", r.gap_ok ? 1.0 : 0.0}, {"gap_rate", r.gap_rate}})});
    }
    {
        const OleinikReport r = oleinik_check(capped(100), 10);
        out.push_back({"oleinik_bound", std::max({r.worst.pointwise, r.worst.weak, r.worst.global}), 1e-12, r.pass(),
                       describe({{"slices", static_cast<double>(r.slices)}})});
    }
    if (sp != 0.0) {
        const BesselEnsembleReport r = bessel_ensemble({1.0, 2500}, sp, 100, s.master_seed, 3, threads);
        const bool pass = r.median_qv_mismatch < 0.05 && r.rate > 0.8 && r.rate < 1.2 && std::abs(r.median_delta - 2.0) < 0.1;
        out.push_back({"bessel_time_change", r.median_qv_mismatch, 0.05, pass,
                       describe({{"rate", r.rate}, {"delta", r.median_delta}})});
    }
    {
        Experiment e = capped(100);
        e.grid = {std::min(s.grid.t_end, 2.0), 200};
        const SdeOrderReport r = sde_order_check(e, 4, true);
        const bool pass = sp == 0.0 ? r.order >= 0.7 : (r.order >= 0.7 && r.order <= 1.3);
        out.push_back({"sde_cross_check_order", r.order, 1.0, pass, ""});
    }
    {
        Experiment e = capped(100);
        e.grid = {s.grid.t_end, std::max<std::size_t>(1, s.grid.n_steps / 2)};
        const AprioriReport r = apriori_bounds_check(e, 0.5, 2);
        out.push_back({"lp_norm_alpha_half_stability", r.last_relative_change, 0.05, r.last_relative_change < 0.05,
                       describe({{"norm", r.levels.back().lp_norm.mean}, {"sup_mean_l2", r.sup_mean_l2}})});
    }
    return out;
}

}  // namespace shs
