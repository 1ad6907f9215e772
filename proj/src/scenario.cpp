#include "magbeam/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "magbeam/baseline.hpp"
#include "magbeam/closedform.hpp"
#include "magbeam/sdp.hpp"

namespace magbeam {

using nlohmann::json;

namespace {

// Inductances above this are almost certainly micro- or milli-henry values
// entered as plain numbers.
constexpr double kMaxPlausibleInductanceH = 1.0;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
    throw SchemaError(path + ": " + msg);
}

double get_number(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) schema_error(path + "." + key, "missing required field");
    if (!j[key].is_number()) schema_error(path + "." + key, "expected a number");
    return j[key].get<double>();
}

double get_positive(const json& j, const std::string& path, const std::string& key) {
    const double v = get_number(j, path, key);
    if (!(v > 0.0)) schema_error(path + "." + key, "must be positive");
    return v;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

Loop parse_loop(const json& j, const std::string& path) {
    Loop l;
    auto vec3 = [&](const std::string& key) {
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
            schema_error(path + "." + key, "expected an array of 3 numbers");
        return Eigen::Vector3d(j[key][0].get<double>(), j[key][1].get<double>(),
                               j[key][2].get<double>());
    };
    l.center = vec3("center_m");
    l.axis = vec3("axis");
    l.radius = get_positive(j, path, "radius_m");
    l.wire_radius = get_positive(j, path, "wire_radius_m");
    if (j.contains("turns")) {
        if (!j["turns"].is_number_integer() || j["turns"].get<int>() < 1)
            schema_error(path + ".turns", "expected a positive integer");
        l.turns = j["turns"].get<int>();
    }
    return l;
}

json loop_to_json(const Loop& l) {
    return json{{"center_m", {l.center.x(), l.center.y(), l.center.z()}},
                {"axis", {l.axis.x(), l.axis.y(), l.axis.z()}},
                {"radius_m", l.radius},
                {"turns", l.turns},
                {"wire_radius_m", l.wire_radius}};
}

} // namespace

const char* to_string(SolveMode m) {
    switch (m) {
        case SolveMode::Closedform: return "closedform";
        case SolveMode::Sdp: return "sdp";
        case SolveMode::EqualCurrent: return "equal_current";
        case SolveMode::Oracle: return "oracle";
        case SolveMode::All: return "all";
    }
    return "unknown";
}

SolveMode solve_mode_from_string(const std::string& s) {
    for (SolveMode m : {SolveMode::Closedform, SolveMode::Sdp, SolveMode::EqualCurrent,
                        SolveMode::Oracle, SolveMode::All})
        if (s == to_string(m)) return m;
    throw SchemaError("solve.mode: unknown mode '" + s + "'");
}

Scenario scenario_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError((origin.empty() ? "" : origin + ": ") + e.what());
    }

    Scenario s;
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        schema_error("schema_version", "missing or not an integer");
    s.schema_version = j["schema_version"].get<int>();
    if (s.schema_version != 1)
        schema_error("schema_version", "unsupported version " +
                                           std::to_string(s.schema_version));
    s.name = j.value("name", "");
    s.frequency_rad_per_s = get_positive(j, "", "frequency_rad_per_s");

    if (!j.contains("tx") || !j["tx"].is_array() || j["tx"].empty())
        schema_error("tx", "expected a non-empty array");
    for (size_t k = 0; k < j["tx"].size(); ++k) {
        const std::string path = "tx[" + std::to_string(k) + "]";
        const json& t = j["tx"][k];
        TxCoil coil;
        coil.r_ohm = get_positive(t, path, "r_ohm");
        if (t.contains("v_max_v")) coil.v_max_v = get_positive(t, path, "v_max_v");
        if (t.contains("a_max_a")) coil.a_max_a = get_positive(t, path, "a_max_a");
        s.tx.push_back(coil);
    }
    const int n = static_cast<int>(s.tx.size());

    if (!j.contains("rx") || !j["rx"].is_object())
        schema_error("rx", "expected an object");
    s.rx.r_parasitic_ohm = get_number(j["rx"], "rx", "r_parasitic_ohm");
    if (s.rx.r_parasitic_ohm < 0.0) schema_error("rx.r_parasitic_ohm", "must be >= 0");
    s.rx.r_load_ohm = get_positive(j["rx"], "rx", "r_load_ohm");

    const bool has_inductances = j.contains("m_tx_rx_h") || j.contains("m_tx_tx_h");
    const bool has_geometry = j.contains("geometry");
    if (has_inductances && has_geometry)
        schema_error("geometry", "give either explicit inductances or geometry, not both");
    if (!has_inductances && !has_geometry)
        schema_error("m_tx_rx_h", "either explicit inductances or geometry is required");

    if (has_inductances) {
        if (!j.contains("m_tx_rx_h") || !j["m_tx_rx_h"].is_array() ||
            static_cast<int>(j["m_tx_rx_h"].size()) != n)
            schema_error("m_tx_rx_h", "expected an array of N numbers");
        VectorXd m(n);
        for (int k = 0; k < n; ++k) {
            m(k) = j["m_tx_rx_h"][k].get<double>();
            if (std::abs(m(k)) > kMaxPlausibleInductanceH)
                throw UnitError("m_tx_rx_h[" + std::to_string(k) +
                                "]: inductances are in henries; " + fmt9(m(k)) +
                                " H is implausibly large");
        }
        s.m_tx_rx_h = m;

        if (!j.contains("m_tx_tx_h") || !j["m_tx_tx_h"].is_array() ||
            static_cast<int>(j["m_tx_tx_h"].size()) != n)
            schema_error("m_tx_tx_h", "expected an N x N array");
        MatrixXd mt(n, n);
        for (int r = 0; r < n; ++r) {
            if (!j["m_tx_tx_h"][r].is_array() ||
                static_cast<int>(j["m_tx_tx_h"][r].size()) != n)
                schema_error("m_tx_tx_h[" + std::to_string(r) + "]",
                             "expected a row of N numbers");
            for (int c = 0; c < n; ++c) {
                mt(r, c) = j["m_tx_tx_h"][r][c].get<double>();
                if (std::abs(mt(r, c)) > kMaxPlausibleInductanceH)
                    throw UnitError("m_tx_tx_h[" + std::to_string(r) + "][" +
                                    std::to_string(c) + "]: implausibly large inductance");
            }
        }
        s.m_tx_tx_h = mt;
    } else {
        const json& g = j["geometry"];
        GeometryBlock gb;
        if (g.contains("segments")) gb.segments = g["segments"].get<int>();
        if (!g.contains("tx_loops") || !g["tx_loops"].is_array() ||
            static_cast<int>(g["tx_loops"].size()) != n)
            schema_error("geometry.tx_loops", "expected one loop per TX");
        for (size_t k = 0; k < g["tx_loops"].size(); ++k)
            gb.tx_loops.push_back(
                parse_loop(g["tx_loops"][k], "geometry.tx_loops[" + std::to_string(k) + "]"));
        if (!g.contains("rx_loop"))
            schema_error("geometry.rx_loop", "missing required field");
        gb.rx_loop = parse_loop(g["rx_loop"], "geometry.rx_loop");
        s.geometry = gb;
    }

    if (j.contains("resonance")) {
        if (!j["resonance"].is_array() ||
            static_cast<int>(j["resonance"].size()) != n + 1)
            schema_error("resonance", "expected N + 1 entries (all TX coils, then RX)");
        for (size_t k = 0; k < j["resonance"].size(); ++k) {
            const std::string path = "resonance[" + std::to_string(k) + "]";
            ResonantTank tank;
            tank.l_h = get_positive(j["resonance"][k], path, "l_h");
            tank.c_f = get_positive(j["resonance"][k], path, "c_f");
            s.resonance.push_back(tank);
        }
    }

    if (j.contains("solve")) {
        const json& sv = j["solve"];
        if (sv.contains("mode"))
            s.solve.mode = solve_mode_from_string(sv["mode"].get<std::string>());
        if (sv.contains("beta0_w")) s.solve.beta0_w = get_positive(sv, "solve", "beta0_w");
        if (sv.contains("sweep")) {
            SweepSpec sw;
            sw.start_w = get_positive(sv["sweep"], "solve.sweep", "start_w");
            sw.stop_w = get_positive(sv["sweep"], "solve.sweep", "stop_w");
            sw.points = sv["sweep"].value("points", 0);
            if (sw.points < 1) schema_error("solve.sweep.points", "must be >= 1");
            if (sw.stop_w < sw.start_w) schema_error("solve.sweep.stop_w", "must be >= start_w");
            s.solve.sweep = sw;
        }
        if (s.solve.beta0_w && s.solve.sweep)
            schema_error("solve", "give either beta0_w or sweep, not both");
        if (sv.contains("tol")) s.solve.tol = get_positive(sv, "solve", "tol");
        if (sv.contains("seed")) s.solve.seed = sv["seed"].get<std::uint64_t>();
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str(), path);
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["schema_version"] = s.schema_version;
    j["name"] = s.name;
    j["frequency_rad_per_s"] = s.frequency_rad_per_s;
    j["tx"] = json::array();
    for (const auto& t : s.tx) {
        json tj{{"r_ohm", t.r_ohm}};
        if (t.v_max_v) tj["v_max_v"] = *t.v_max_v;
        if (t.a_max_a) tj["a_max_a"] = *t.a_max_a;
        j["tx"].push_back(tj);
    }
    j["rx"] = {{"r_parasitic_ohm", s.rx.r_parasitic_ohm}, {"r_load_ohm", s.rx.r_load_ohm}};
    if (s.m_tx_rx_h) {
        j["m_tx_rx_h"] = std::vector<double>(s.m_tx_rx_h->data(),
                                             s.m_tx_rx_h->data() + s.m_tx_rx_h->size());
        json rows = json::array();
        for (int r = 0; r < s.m_tx_tx_h->rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < s.m_tx_tx_h->cols(); ++c) row.push_back((*s.m_tx_tx_h)(r, c));
            rows.push_back(row);
        }
        j["m_tx_tx_h"] = rows;
    }
    if (s.geometry) {
        json g;
        g["segments"] = s.geometry->segments;
        g["tx_loops"] = json::array();
        for (const auto& l : s.geometry->tx_loops) g["tx_loops"].push_back(loop_to_json(l));
        g["rx_loop"] = loop_to_json(s.geometry->rx_loop);
        j["geometry"] = g;
    }
    if (!s.resonance.empty()) {
        j["resonance"] = json::array();
        for (const auto& t : s.resonance)
            j["resonance"].push_back({{"l_h", t.l_h}, {"c_f", t.c_f}});
    }
    json sv;
    sv["mode"] = to_string(s.solve.mode);
    if (s.solve.beta0_w) sv["beta0_w"] = *s.solve.beta0_w;
    if (s.solve.sweep)
        sv["sweep"] = {{"start_w", s.solve.sweep->start_w},
                       {"stop_w", s.solve.sweep->stop_w},
                       {"points", s.solve.sweep->points}};
    sv["tol"] = s.solve.tol;
    sv["seed"] = s.solve.seed;
    j["solve"] = sv;
    return j.dump(2) + "\n";
}

SystemParams Scenario::to_system_params() const {
    SystemParams p;
    p.omega = frequency_rad_per_s;
    p.tx = tx;
    p.rx = rx;
    p.resonance = resonance;
    const int n = static_cast<int>(tx.size());
    if (geometry) {
        const auto& g = *geometry;
        p.m = VectorXd(n);
        p.m_tx = MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k)
            p.m(k) = mutual_inductance_neumann(g.tx_loops[k], g.rx_loop, g.segments);
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c)
                p.m_tx(r, c) = p.m_tx(c, r) =
                    mutual_inductance_neumann(g.tx_loops[r], g.tx_loops[c], g.segments);
    } else {
        p.m = *m_tx_rx_h;
        p.m_tx = *m_tx_tx_h;
    }
    return p;
}

namespace {

std::vector<SolveMode> expand_modes(SolveMode mode, bool for_sweep) {
    if (mode != SolveMode::All) return {mode};
    // The oracle is excluded from sweeps: 50 restarts per grid point adds
    // minutes without adding information the point solves don't give.
    if (for_sweep) return {SolveMode::Closedform, SolveMode::Sdp, SolveMode::EqualCurrent};
    return {SolveMode::Closedform, SolveMode::Sdp, SolveMode::EqualCurrent,
            SolveMode::Oracle};
}

ModeResult solve_one(const SystemModel& model, SolveMode mode, double beta0,
                     const SolveSpec& spec, const RunOptions& opt) {
    ModeResult r;
    r.mode = mode;
    const auto t0 = std::chrono::steady_clock::now();
    switch (mode) {
        case SolveMode::Closedform: {
            r.solution = solve_unconstrained(model, beta0).solution;
            break;
        }
        case SolveMode::Sdp: {
            const SdpProblem problem = formulate(model, beta0);
            SdrSolution sdr = solve_sdr(problem, spec.tol);
            if (sdr.status == IpmStatus::Infeasible) {
                r.solution.currents = VectorXcd::Zero(model.size());
                r.solution.per_tx_power = VectorXd::Zero(model.size());
                r.solution.status = SolveStatus::Infeasible;
            } else if (sdr.status == IpmStatus::MaxIterations) {
                r.solution.currents = VectorXcd::Zero(model.size());
                r.solution.per_tx_power = VectorXd::Zero(model.size());
                r.solution.status = SolveStatus::MaxIterations;
            } else {
                const VectorXcd i = extract_rank_one(problem, sdr);
                r.solution = make_solution(model, i, beta0, SolveStatus::Optimal);
                r.rank_ratio = sdr.rank_ratio;
                r.kkt_residual = verify_kkt(model, beta0, sdr).max_residual();
            }
            break;
        }
        case SolveMode::EqualCurrent:
            r.solution = equal_current_min_power(model, beta0);
            break;
        case SolveMode::Oracle: {
            OracleConfig cfg;
            cfg.seed = spec.seed;
            r.solution = multistart_qcqp(model, beta0, cfg);
            break;
        }
        case SolveMode::All:
            throw Error("mode 'all' must be expanded before solving");
    }
    if (opt.include_timing) {
        const auto t1 = std::chrono::steady_clock::now();
        r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    return r;
}

json solution_to_json(const CurrentSolution& sol) {
    json j;
    j["status"] = to_string(sol.status);
    j["load_power_w"] = sol.load_power;
    j["total_power_w"] = sol.total_power;
    j["efficiency"] = sol.efficiency;
    j["i_mag_a"] = json::array();
    j["i_phase_rad"] = json::array();
    for (int k = 0; k < sol.currents.size(); ++k) {
        j["i_mag_a"].push_back(std::abs(sol.currents(k)));
        j["i_phase_rad"].push_back(std::arg(sol.currents(k)));
    }
    j["per_tx_power_w"] = std::vector<double>(
        sol.per_tx_power.data(), sol.per_tx_power.data() + sol.per_tx_power.size());
    j["binding"] = sol.binding.binding_names();
    return j;
}

} // namespace

SolveReport run_solve(const Scenario& scenario, const RunOptions& opt) {
    if (!scenario.solve.beta0_w)
        throw SchemaError("solve.beta0_w: required for a single solve");
    const SystemModel model = build_system(scenario.to_system_params());
    const double beta0 = *scenario.solve.beta0_w;

    SolveReport report;
    report.beta0_w = beta0;
    for (SolveMode m : expand_modes(scenario.solve.mode, /*for_sweep=*/false)) {
        try {
            report.results.push_back(solve_one(model, m, beta0, scenario.solve, opt));
        } catch (const NoFeasiblePointFound&) {
            // The oracle has no infeasibility certificate; when no restart
            // lands, record the mode as infeasible like the certified solvers.
            ModeResult r;
            r.mode = m;
            r.solution.currents = VectorXcd::Zero(model.size());
            r.solution.per_tx_power = VectorXd::Zero(model.size());
            r.solution.status = SolveStatus::Infeasible;
            report.results.push_back(r);
        }
    }

    const ModeResult* cf = nullptr;
    const ModeResult* sdp = nullptr;
    for (const auto& r : report.results) {
        if (r.mode == SolveMode::Closedform) cf = &r;
        if (r.mode == SolveMode::Sdp) sdp = &r;
        if (r.solution.status == SolveStatus::Infeasible) report.exit_code = 2;
    }
    if (cf && sdp && sdp->solution.status == SolveStatus::Optimal)
        report.closedform_sdp_gap =
            std::abs(cf->solution.total_power - sdp->solution.total_power) /
            sdp->solution.total_power;
    return report;
}

std::string SolveReport::to_json_text() const {
    json j;
    j["beta0_w"] = beta0_w;
    j["results"] = json::object();
    for (const auto& r : results) {
        json rj = solution_to_json(r.solution);
        if (r.mode == SolveMode::Sdp) {
            rj["rank_ratio"] = r.rank_ratio;
            rj["kkt_residual"] = r.kkt_residual;
        }
        rj["wall_ms"] = r.wall_ms;
        j["results"][to_string(r.mode)] = rj;
    }
    if (closedform_sdp_gap) j["closedform_sdp_gap"] = *closedform_sdp_gap;
    j["exit_code"] = exit_code;
    return j.dump(2) + "\n";
}

std::string SolveReport::to_text() const {
    std::ostringstream os;
    os << "beta0 = " << fmt9(beta0_w) << " W\n";
    for (const auto& r : results) {
        const auto& s = r.solution;
        os << "[" << to_string(r.mode) << "] status=" << to_string(s.status);
        if (s.status != SolveStatus::Infeasible) {
            os << " total=" << fmt9(s.total_power) << " W"
               << " efficiency=" << fmt9(s.efficiency);
            os << " |i|=(";
            for (int k = 0; k < s.currents.size(); ++k)
                os << (k ? ", " : "") << fmt9(std::abs(s.currents(k)));
            os << ")";
            const auto binding = s.binding.binding_names();
            if (!binding.empty()) {
                os << " binding=";
                for (size_t k = 0; k < binding.size(); ++k)
                    os << (k ? ";" : "") << binding[k];
            }
            if (r.mode == SolveMode::Sdp)
                os << " rank_ratio=" << fmt9(r.rank_ratio)
                   << " kkt=" << fmt9(r.kkt_residual);
        }
        os << "\n";
    }
    if (closedform_sdp_gap)
        os << "closedform/sdp objective agreement: " << fmt9(*closedform_sdp_gap) << "\n";
    return os.str();
}

std::vector<SweepRecord> run_sweep(const Scenario& scenario, const RunOptions& opt) {
    if (!scenario.solve.sweep)
        throw SchemaError("solve.sweep: required for a sweep run");
    const SweepSpec sw = *scenario.solve.sweep;
    const SystemModel model = build_system(scenario.to_system_params());

    const std::vector<SolveMode> modes =
        expand_modes(scenario.solve.mode, /*for_sweep=*/true);
    std::vector<SweepRecord> records;
    for (SolveMode mode : modes) {
        for (int k = 0; k < sw.points; ++k) {
            const double beta0 =
                sw.points == 1
                    ? sw.start_w
                    : sw.start_w + (sw.stop_w - sw.start_w) * k / (sw.points - 1);
            SweepRecord rec;
            rec.beta0_w = beta0;
            rec.mode = mode;
            ModeResult mr;
            try {
                mr = solve_one(model, mode, beta0, scenario.solve, opt);
            } catch (const NoFeasiblePointFound&) {
                mr.mode = mode;
                mr.solution.currents = VectorXcd::Zero(model.size());
                mr.solution.per_tx_power = VectorXd::Zero(model.size());
                mr.solution.status = SolveStatus::Infeasible;
            }
            rec.status = mr.solution.status;
            if (rec.status != SolveStatus::Infeasible) {
                rec.total_power_w = mr.solution.total_power;
                rec.efficiency = mr.solution.efficiency;
                for (int t = 0; t < model.size(); ++t) {
                    rec.i_mag.push_back(std::abs(mr.solution.currents(t)));
                    rec.i_phase.push_back(std::arg(mr.solution.currents(t)));
                }
                const auto names = mr.solution.binding.binding_names();
                for (size_t t = 0; t < names.size(); ++t)
                    rec.binding += (t ? ";" : "") + names[t];
            } else {
                rec.i_mag.assign(model.size(), 0.0);
                rec.i_phase.assign(model.size(), 0.0);
            }
            rec.rank_ratio = mr.rank_ratio;
            rec.kkt_residual = mr.kkt_residual;
            rec.wall_ms = mr.wall_ms;
            records.push_back(rec);
        }
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const SweepRecord& a, const SweepRecord& b) {
                         const std::string ma = to_string(a.mode), mb = to_string(b.mode);
                         return std::tie(ma, a.beta0_w) < std::tie(mb, b.beta0_w);
                     });
    return records;
}

std::string sweep_to_csv(const std::vector<SweepRecord>& records, int n_tx) {
    std::ostringstream os;
    os << "beta0,mode,status,total_power_w,efficiency";
    for (int k = 1; k <= n_tx; ++k) os << ",i_mag_" << k;
    for (int k = 1; k <= n_tx; ++k) os << ",i_phase_" << k;
    os << ",binding,rank_ratio,kkt_residual,wall_ms\n";
    for (const auto& r : records) {
        os << fmt9(r.beta0_w) << "," << to_string(r.mode) << "," << to_string(r.status)
           << "," << fmt9(r.total_power_w) << "," << fmt9(r.efficiency);
        for (double v : r.i_mag) os << "," << fmt9(v);
        for (double v : r.i_phase) os << "," << fmt9(v);
        os << "," << r.binding << "," << fmt9(r.rank_ratio) << ","
           << fmt9(r.kkt_residual) << "," << fmt9(r.wall_ms) << "\n";
    }
    return os.str();
}

MaxPowerReport run_maxpower(const Scenario& scenario) {
    const SystemModel model = build_system(scenario.to_system_params());
    MaxPowerReport rep;
    const auto [beam_w, beam_sol] = max_deliverable_power(model, scenario.solve.tol);
    rep.beamforming_w = beam_w;
    rep.beamforming_efficiency = beam_sol.efficiency;
    const auto [eq_w, eq_sol] = equal_current_max_power(model);
    rep.equal_current_w = eq_w;
    rep.equal_current_efficiency = eq_sol.efficiency;
    rep.enhancement_percent = 100.0 * (beam_w / eq_w - 1.0);
    return rep;
}

std::string MaxPowerReport::to_json_text() const {
    json j;
    j["beamforming_w"] = beamforming_w;
    j["beamforming_efficiency"] = beamforming_efficiency;
    j["equal_current_w"] = equal_current_w;
    j["equal_current_efficiency"] = equal_current_efficiency;
    j["enhancement_percent"] = enhancement_percent;
    return j.dump(2) + "\n";
}

std::string MaxPowerReport::to_text() const {
    std::ostringstream os;
    os << "beamforming:   " << fmt9(beamforming_w)
       << " W (efficiency " << fmt9(beamforming_efficiency) << ")\n"
       << "equal current: " << fmt9(equal_current_w)
       << " W (efficiency " << fmt9(equal_current_efficiency) << ")\n"
       << "deliverable-power enhancement: " << fmt9(enhancement_percent) << " %\n";
    return os.str();
}

} // namespace magbeam
