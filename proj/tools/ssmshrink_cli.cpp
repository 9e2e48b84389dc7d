// ssmshrink: synthesize, reduce and bound Deep SSMs with LQO layers.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssmshrink/bound.hpp"
#include "ssmshrink/io.hpp"
#include "ssmshrink/reduce.hpp"

using namespace ssmshrink;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct SynthArgs
{
    SynthOptions opts;
    std::string out;
};

struct ReduceArgs
{
    std::string model;
    std::vector<int> ranks;
    int horizon = 64;
    std::string init = "mode-dominance";
    int max_iters = 20;
    double c1 = 1e-4;
    double rho = 0.5;
    std::vector<double> eta{1.0, 1.0, 1.0, 1.0};
    double grad_tol = 1e-8;
    std::uint64_t seed = 0;
    std::optional<double> b;
    std::string out;
    std::string report;
};

struct PairArgs
{
    std::string full;
    std::string reduced;
    std::string input;
    bool header = false;
    int horizon = 64;
    std::optional<double> b;
    std::optional<double> omega;
};

struct GradcheckArgs
{
    std::string model;
    std::vector<int> ranks;
    int horizon = 16;
    double fd_step = 1e-6;
    std::uint64_t seed = 0;
    double threshold = 1e-5;
    bool flip_c_sign = false;
};

RealSignal load_input(const PairArgs& a, const DeepSsm& model)
{
    RealSignal s = load_signal(a.input, a.header);
    if (s.rows() != model.width())
        throw ShapeError("input has " + std::to_string(s.rows()) + " columns, model width is " +
                         std::to_string(model.width()));
    if (s.cols() < a.horizon)
        throw ShapeError("input has " + std::to_string(s.cols()) + " samples, horizon is " +
                         std::to_string(a.horizon));
    return s.leftCols(a.horizon);
}

void check_pair(const DeepSsm& full, const DeepSsm& reduced)
{
    if (full.depth() != reduced.depth() || full.width() != reduced.width())
        throw ShapeError("full and reduced models differ in depth or width");
}

int run_synth(const SynthArgs& a)
{
    save_model(synth_random_dssm(a.opts), a.out);
    return kExitOk;
}

int run_reduce(const ReduceArgs& a)
{
    const DeepSsm full = load_model(a.model);
    if (static_cast<int>(a.ranks.size()) != full.depth())
        throw ShapeError("got " + std::to_string(a.ranks.size()) + " ranks for " +
                         std::to_string(full.depth()) + " layers");
    if (a.eta.size() != 4)
        throw DomainError("--eta needs four values (lambda, B, C, U)");
    const Horizon L(a.horizon);
    const auto fulls = full.systems();

    std::vector<LqoSystem> init;
    for (int i = 0; i < full.depth(); ++i)
    {
        const auto& s = fulls[i];
        if (a.ranks[i] < 1 || a.ranks[i] > s.state_dim())
            throw DomainError("rank of layer " + std::to_string(i) + " must lie in [1, " +
                              std::to_string(s.state_dim()) + "]");
        if (a.init == "mode-dominance")
            init.push_back(init_mode_dominance(s, a.ranks[i]));
        else
            init.push_back(init_random_stable(a.ranks[i], s.input_dim(), s.output_dim(),
                                              s.quad_rank(), a.seed + static_cast<std::uint64_t>(i)));
    }

    ReductionConfig cfg;
    cfg.ranks = a.ranks;
    cfg.horizon = a.horizon;
    std::copy(a.eta.begin(), a.eta.end(), cfg.eta_init.begin());
    cfg.c1 = a.c1;
    cfg.rho = a.rho;
    cfg.max_iters = a.max_iters;
    cfg.grad_tol = a.grad_tol;
    cfg.threads = threads_from_env();

    const auto result = reduce_gradient_descent(fulls, init, reduction_weights(full, L, a.b), cfg);
    save_model(build_reduced_dssm(full, result.roms), a.out);
    if (!a.report.empty())
    {
        std::ofstream os(a.report);
        if (!os)
            throw FormatError("cannot open '" + a.report + "' for writing");
        os << report_csv(result.report);
    }
    std::cerr << "reduce: " << to_string(result.report.reason) << ", objective "
              << result.report.initial_objective << " -> " << result.report.final_objective
              << " after " << result.report.rows.size() - 1 << " iterations\n";
    return result.report.reason == Termination::stalled ? kExitNumerical : kExitOk;
}

int run_bound(const PairArgs& a)
{
    const DeepSsm full = load_model(a.full);
    const DeepSsm reduced = load_model(a.reduced);
    check_pair(full, reduced);
    const RealSignal s = load_input(a, full);
    BoundOptions opts;
    opts.b = a.b;
    opts.omega = a.omega;
    const auto rep = evaluate_bounds(full, reduced, s, Horizon(a.horizon), opts);

    if (!rep.b_covers_inputs)
        std::cerr << "warning: b = " << rep.b << " is below the measured input norm "
                  << rep.max_input_norm << "; the bound is not guaranteed\n";

    nlohmann::json j;
    j["omega"] = rep.omega;
    j["b"] = rep.b;
    j["max_input_norm"] = rep.max_input_norm;
    j["b_covers_inputs"] = rep.b_covers_inputs;
    j["bound_value"] = rep.bound_value;
    j["theorem_value"] = rep.theorem_value;
    j["measured_error"] = rep.measured_error;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& t : rep.per_layer)
        layers.push_back({{"h2l_error", t.h2l_error},
                          {"h1_norm", t.h1_norm},
                          {"h2_norm", t.h2_norm},
                          {"g_tilde", t.gain_gtilde},
                          {"G_tilde", t.gain_Gtilde},
                          {"g", t.gain_g},
                          {"G", t.gain_G},
                          {"u_norm", t.u_norm},
                          {"uhat_norm", t.uhat_norm}});
    j["layers"] = std::move(layers);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_eval(const PairArgs& a)
{
    const DeepSsm full = load_model(a.full);
    const DeepSsm reduced = load_model(a.reduced);
    check_pair(full, reduced);
    const RealSignal s = load_input(a, full);
    const Horizon L(a.horizon);
    const auto tf = forward(full, s, L);
    const auto tr = forward(reduced, s, L);
    std::cout << "e_xi," << format_double(measured_output_error(full, reduced, s, L)) << '\n';
    std::cout << "layer,u_norm,uhat_norm\n";
    for (int i = 0; i < full.depth(); ++i)
        std::cout << i + 1 << ',' << format_double(signal_l2_norm(tf.inputs[i])) << ','
                  << format_double(signal_l2_norm(tr.inputs[i])) << '\n';
    return kExitOk;
}

int run_gradcheck(const GradcheckArgs& a)
{
    const DeepSsm full = load_model(a.model);
    if (static_cast<int>(a.ranks.size()) != full.depth())
        throw ShapeError("got " + std::to_string(a.ranks.size()) + " ranks for " +
                         std::to_string(full.depth()) + " layers");
    const Horizon L(a.horizon);
    const auto fulls = full.systems();
    std::vector<LqoSystem> roms;
    for (int i = 0; i < full.depth(); ++i)
        roms.push_back(init_random_stable(a.ranks[i], fulls[i].input_dim(), fulls[i].output_dim(),
                                          fulls[i].quad_rank(),
                                          a.seed + static_cast<std::uint64_t>(i)));
    std::vector<double> gains(fulls.size(), 1.0);
    GradientOptions opts;
    opts.flip_c_cross_sign = a.flip_c_sign;
    const auto errs = finite_difference_check(fulls, roms, gains, L, a.fd_step, opts);

    bool ok = true;
    std::cout << "layer,block,max_rel_error,max_abs_error\n";
    for (const auto& e : errs)
    {
        std::cout << e.layer + 1 << ',' << e.block << ',' << std::setprecision(3)
                  << std::scientific << e.rel_error << ',' << e.abs_error << '\n';
        ok = ok && e.rel_error <= a.threshold;
    }
    return ok ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Model-order reduction and error bounds for Deep SSMs with LQO layers"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cs = app.add_subcommand("synth", "Write a random stable Deep SSM");
    cs->add_option("--layers", synth.opts.layers)->required()->check(CLI::PositiveNumber);
    cs->add_option("--state-dim", synth.opts.state_dim)->required()->check(CLI::PositiveNumber);
    cs->add_option("--width", synth.opts.width)->required()->check(CLI::Range(2, 1 << 20));
    cs->add_option("--quad-rank", synth.opts.quad_rank)->check(CLI::PositiveNumber);
    cs->add_option("--seed", synth.opts.seed);
    cs->add_option("--ln-eps", synth.opts.ln_eps)->check(CLI::PositiveNumber);
    cs->add_option("-o,--output", synth.out)->required();

    ReduceArgs red;
    auto* cr = app.add_subcommand("reduce", "Reduce every layer with gradient descent");
    cr->add_option("--model", red.model)->required();
    cr->add_option("--ranks", red.ranks)->required()->delimiter(',');
    cr->add_option("--horizon", red.horizon)->check(CLI::PositiveNumber);
    cr->add_option("--init", red.init)->check(CLI::IsMember({"mode-dominance", "random"}));
    cr->add_option("--max-iters", red.max_iters)->check(CLI::NonNegativeNumber);
    cr->add_option("--c1", red.c1);
    cr->add_option("--rho", red.rho);
    cr->add_option("--eta", red.eta)->delimiter(',')->expected(4);
    cr->add_option("--grad-tol", red.grad_tol)->check(CLI::NonNegativeNumber);
    cr->add_option("--seed", red.seed);
    cr->add_option("--b", red.b, "Input norm used for the layer weights")->check(CLI::PositiveNumber);
    cr->add_option("-o,--output", red.out)->required();
    cr->add_option("--report", red.report);

    PairArgs bnd;
    auto* cb = app.add_subcommand("bound", "Evaluate the output-error bound as JSON");
    PairArgs ev;
    auto* ce = app.add_subcommand("eval", "Measure the output error and layer input norms");
    for (auto [cmd, args] : {std::pair{cb, &bnd}, std::pair{ce, &ev}})
    {
        cmd->add_option("--full", args->full)->required();
        cmd->add_option("--reduced", args->reduced)->required();
        cmd->add_option("--input", args->input)->required();
        cmd->add_option("--horizon", args->horizon)->required()->check(CLI::PositiveNumber);
        cmd->add_flag("--header", args->header, "Skip the first line of the input CSV");
    }
    cb->add_option("--b", bnd.b)->check(CLI::NonNegativeNumber);
    cb->add_option("--omega", bnd.omega)->check(CLI::NonNegativeNumber);

    GradcheckArgs gc;
    auto* cg = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    cg->add_option("--model", gc.model)->required();
    cg->add_option("--ranks", gc.ranks)->required()->delimiter(',');
    cg->add_option("--horizon", gc.horizon)->check(CLI::PositiveNumber);
    cg->add_option("--fd-step", gc.fd_step);
    cg->add_option("--seed", gc.seed);
    cg->add_option("--threshold", gc.threshold)->check(CLI::NonNegativeNumber);
    cg->add_flag("--debug-flip-c-sign", gc.flip_c_sign, "Inject a sign error into the C gradient");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitUsage;
    }

    try
    {
        if (cs->parsed())
            return run_synth(synth);
        if (cr->parsed())
            return run_reduce(red);
        if (cb->parsed())
            return run_bound(bnd);
        if (ce->parsed())
            return run_eval(ev);
        return run_gradcheck(gc);
    }
    catch (const StabilityError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    catch (const NumericalError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
