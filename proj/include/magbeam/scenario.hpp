#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magbeam/geometry.hpp"
#include "magbeam/model.hpp"

namespace magbeam {

enum class SolveMode { Closedform, Sdp, EqualCurrent, Oracle, All };

const char* to_string(SolveMode m);
SolveMode solve_mode_from_string(const std::string& s);

struct SweepSpec {
    double start_w = 0.0;
    double stop_w = 0.0;
    int points = 0;
};

struct SolveSpec {
    SolveMode mode = SolveMode::All;
    std::optional<double> beta0_w;
    std::optional<SweepSpec> sweep;
    double tol = 1e-7;
    std::uint64_t seed = 1;
};

struct GeometryBlock {
    int segments = 256;
    std::vector<Loop> tx_loops;
    Loop rx_loop;
};

/// File-level experiment description. Carries either explicit inductances
/// or a geometry block (never both); the latter is expanded through the
/// Neumann quadrature when the system model is built.
struct Scenario {
    int schema_version = 1;
    std::string name;
    double frequency_rad_per_s = 0.0;
    std::vector<TxCoil> tx;
    RxCoil rx;
    std::optional<VectorXd> m_tx_rx_h;
    std::optional<MatrixXd> m_tx_tx_h;
    std::vector<ResonantTank> resonance;
    std::optional<GeometryBlock> geometry;
    SolveSpec solve;

    SystemParams to_system_params() const;  // expands geometry if present
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text, const std::string& origin = "");
std::string scenario_to_json_text(const Scenario& s);

struct ModeResult {
    SolveMode mode = SolveMode::Sdp;
    CurrentSolution solution;
    double rank_ratio = 0.0;     // SDP only
    double kkt_residual = 0.0;   // SDP only
    double wall_ms = 0.0;
};

struct SolveReport {
    double beta0_w = 0.0;
    std::vector<ModeResult> results;
    std::optional<double> closedform_sdp_gap;  // relative objective difference
    int exit_code = 0;  // 0 optimal, 2 infeasible

    std::string to_json_text() const;
    std::string to_text() const;
};

struct RunOptions {
    bool include_timing = false;  // wall_ms stays 0 in reports/CSV when false
};

SolveReport run_solve(const Scenario& scenario, const RunOptions& opt = {});

struct SweepRecord {
    double beta0_w = 0.0;
    SolveMode mode = SolveMode::Sdp;
    SolveStatus status = SolveStatus::Optimal;
    double total_power_w = 0.0;
    double efficiency = 0.0;
    std::vector<double> i_mag;
    std::vector<double> i_phase;
    std::string binding;
    double rank_ratio = 0.0;
    double kkt_residual = 0.0;
    double wall_ms = 0.0;
};

std::vector<SweepRecord> run_sweep(const Scenario& scenario, const RunOptions& opt = {});
std::string sweep_to_csv(const std::vector<SweepRecord>& records, int n_tx);

struct MaxPowerReport {
    double beamforming_w = 0.0;
    double beamforming_efficiency = 0.0;
    double equal_current_w = 0.0;
    double equal_current_efficiency = 0.0;
    double enhancement_percent = 0.0;

    std::string to_json_text() const;
    std::string to_text() const;
};

MaxPowerReport run_maxpower(const Scenario& scenario);

} // namespace magbeam
