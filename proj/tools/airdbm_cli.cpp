// Command-line front end. Talks to the toolkit only through the C interface.

#include "airdbm/airdbm.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool json_output = false;
    bool quiet = false;
};

// Options shared by the GA-driven commands.
struct GaFlags {
    std::optional<std::size_t> population;
    std::optional<std::size_t> generations;
    std::string crossover;
    std::string mutation;
    std::optional<double> crossover_fraction;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--population,--pop", population, "GA population size");
        cmd->add_option("--generations,--gens", generations, "GA generation limit");
        cmd->add_option("--crossover", crossover, "sbx or intermediate");
        cmd->add_option("--mutation", mutation, "polynomial or adaptive");
        cmd->add_option("--crossover-fraction", crossover_fraction, "share of offspring produced by crossover");
    }

    [[nodiscard]] json to_json() const
    {
        json g = json::object();
        if (population)
            g["population"] = *population;
        if (generations)
            g["generations"] = *generations;
        if (!crossover.empty())
            g["crossover"] = crossover;
        if (!mutation.empty())
            g["mutation"] = mutation;
        if (crossover_fraction)
            g["crossover_fraction"] = *crossover_fraction;
        return g;
    }
};

struct EvalFlags {
    std::optional<double> reynolds, mach, alpha_start, alpha_end, alpha_step;
    std::optional<int> retries;
    std::string evaluator;
    std::string xfoil;
    std::optional<double> timeout;
    bool keep = false;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--evaluator", evaluator, "mock or xfoil");
        cmd->add_option("--xfoil", xfoil, "XFOIL executable");
        cmd->add_option("--xfoil-timeout", timeout, "seconds allowed per operating point");
        cmd->add_flag("--keep-xfoil-files", keep, "keep XFOIL work directories");
        cmd->add_option("--re", reynolds, "Reynolds number");
        cmd->add_option("--mach", mach, "Mach number");
        cmd->add_option("--alpha-start", alpha_start, "first angle of attack (deg)");
        cmd->add_option("--alpha-end", alpha_end, "last angle of attack (deg)");
        cmd->add_option("--alpha-step", alpha_step, "angle increment (deg)");
        cmd->add_option("--retries", retries, "retries for unconverged points");
    }

    void apply(json& req) const
    {
        json e = json::object();
        if (reynolds)
            e["reynolds"] = *reynolds;
        if (mach)
            e["mach"] = *mach;
        if (alpha_start)
            e["alpha_start"] = *alpha_start;
        if (alpha_end)
            e["alpha_end"] = *alpha_end;
        if (alpha_step)
            e["alpha_step"] = *alpha_step;
        if (retries)
            e["max_retries"] = *retries;
        req["eval"] = e;
        if (!evaluator.empty())
            req["evaluator"] = evaluator;
        json x = json::object();
        if (!xfoil.empty())
            x["executable"] = xfoil;
        if (timeout)
            x["timeout"] = *timeout;
        if (keep)
            x["keep_files"] = true;
        req["xfoil"] = x;
    }
};

void print_fields(const json& node, const std::string& prefix)
{
    for (const auto& [key, value] : node.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_primitive())
            std::cout << name << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
        else if (value.is_object())
            print_fields(value, name);
        else if (value.size() <= 16 && std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_primitive(); }))
            std::cout << name << ": " << value.dump() << '\n';
        else
            std::cout << name << ": [" << value.size() << " entries, see --json]\n";
    }
}

void print_human(const json& report)
{
    json body = report;
    body.erase("header");
    body.erase("files");
    print_fields(body, "");
    if (report.contains("files"))
        for (const auto& f : report["files"])
            std::cout << "wrote " << f.get<std::string>() << '\n';
    if (report.contains("header"))
        std::cout << "seed " << report["header"]["seed"] << ", config " << report["header"]["config_hash"].get<std::string>().substr(0, 12)
                  << '\n';
}

int exit_code_for(airdbm_status status)
{
    if (status == AIRDBM_OK)
        return 0;
    if (status == AIRDBM_INVALID_ARGUMENT || status == AIRDBM_CONFIG_ERROR)
        return 2;
    return 1;
}

void on_signal(int)
{
    airdbm_interrupt();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"AirDbM: design-by-morphing airfoil toolkit", "airdbm"};
    app.set_version_flag("--version", std::string(airdbm_version()));
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI file with option defaults (sections name subcommands)");

    Globals g;
    app.add_option("--seed", g.seed, "random seed (generated and printed when omitted)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--json", g.json_output, "print the full JSON report");
    app.add_flag("-q,--quiet", g.quiet, "suppress progress lines");

    std::string workflow;
    json req = json::object();
    GaFlags ga;
    EvalFlags ev;

    // Shared option storage; each subcommand binds the subset it uses.
    std::string catalog, baselines, target, out_dir, dest, url, src, out, method, resume_dir, static_dir, bind = "127.0.0.1";
    std::string agent = "hillclimb", transport = "stdio", file, dir;
    std::vector<std::string> names;
    std::vector<double> dv, knobs, weights, warm;
    std::vector<std::size_t> sizes;
    std::optional<std::size_t> n, sample, trials, episodes, episode_length, checkpoint_every, max_connections;
    std::optional<std::uint64_t> m;
    std::optional<double> threshold, sigma, max_seconds;
    std::optional<int> port, resolution;
    bool no_lad = false, evaluate_final = false, no_warm = false, describe = false, replicate = false, no_preruns = false;
    bool show_names = false;
    std::string checkpoint_dir;

    auto add_catalog = [&](CLI::App* c, bool required) {
        auto* o = c->add_option("--catalog", catalog, "catalog archive or directory of .dat files");
        if (required)
            o->required();
        c->add_option("--F,--resolution", resolution, "Selig-vector resolution when building from .dat files");
    };
    auto add_baselines = [&](CLI::App* c) {
        c->add_option("--baselines", baselines, "baselines.json, or 'published' for the twelve published baselines");
    };
    auto add_out_dir = [&](CLI::App* c) { c->add_option("--out-dir", out_dir, "directory for reports and CSV files"); };
    auto add_reconstruction = [&](CLI::App* c) {
        ga.add(c);
        c->add_option("--threshold", threshold, "success threshold on S'");
        c->add_flag("--no-lad-seed", no_lad, "do not seed the GA with the least-deviation and repair-aware blends");
    };

    auto* fetch = app.add_subcommand("fetch", "mirror the UIUC coordinate database");
    fetch->add_option("--url", url, "index page, file:// URL or local directory");
    fetch->add_option("--dest", dest, "destination directory")->required();

    auto* cat = app.add_subcommand("catalog", "build or inspect a shape catalog");
    cat->require_subcommand(1);
    auto* cat_build = cat->add_subcommand("build", "resample a directory of coordinate files");
    cat_build->add_option("--src", src, "directory of .dat files")->required();
    cat_build->add_option("--out", out, "catalog archive to write");
    cat_build->add_option("--F,--resolution", resolution, "Selig-vector resolution (even)");
    auto* cat_info = cat->add_subcommand("info", "summarize a catalog");
    add_catalog(cat_info, true);
    cat_info->add_flag("--names", show_names, "list every name");

    auto* bl = app.add_subcommand("baselines", "baseline set utilities");
    bl->require_subcommand(1);
    auto* bl_export = bl->add_subcommand("export", "write a baselines.json from catalog names");
    add_catalog(bl_export, true);
    bl_export->add_option("--names", names, "catalog names (default: the published twelve)")->delimiter(',');
    bl_export->add_option("--out", out, "output path (default baselines.json)");

    auto* rec = app.add_subcommand("reconstruct", "reconstruct one target from the baselines");
    add_catalog(rec, false);
    add_baselines(rec);
    add_reconstruction(rec);
    add_out_dir(rec);
    auto* rec_target = rec->add_option("--target", target, "catalog name, title or baseline name");
    auto* rec_file = rec->add_option("--file", file, "coordinate file of the target");
    rec_target->excludes(rec_file);
    rec->callback([&] {
        if (target.empty() && file.empty())
            throw CLI::RequiredError("--target or --file");
    });
    rec->add_option("--warm-start", warm, "initial weight vector")->delimiter(',');

    auto* rec_all = app.add_subcommand("reconstruct-all", "reconstruct every catalog shape");
    add_catalog(rec_all, true);
    add_baselines(rec_all);
    add_reconstruction(rec_all);
    add_out_dir(rec_all);
    rec_all->add_option("--sample", sample, "random subsample size");

    auto* sel = app.add_subcommand("select-baselines", "greedy forward baseline selection");
    add_catalog(sel, true);
    add_reconstruction(sel);
    add_out_dir(sel);
    sel->add_option("--n", n, "number of baselines");
    sel->add_option("--sample", sample, "random subsample of the catalog");
    sel->add_option("--resume-dir,--resume", resume_dir, "persist rounds here and resume from them");
    sel->add_option("--out", out, "baselines.json path (default: inside --out-dir)");
    sel->add_flag("--evaluate-final", evaluate_final, "score the final set on the remaining shapes");

    auto* rate = app.add_subcommand("rate-curve", "success rate against baseline count");
    add_catalog(rate, true);
    add_baselines(rate);
    add_reconstruction(rate);
    add_out_dir(rate);
    rate->add_option("--sizes", sizes, "baseline counts")->delimiter(',');
    rate->add_option("--sample", sample, "random subsample size");
    rate->add_flag("--no-warm-start", no_warm, "start each size from scratch");

    auto* rnd = app.add_subcommand("random-baseline-experiment", "score randomly drawn baseline sets");
    add_catalog(rnd, true);
    add_reconstruction(rnd);
    add_out_dir(rnd);
    rnd->add_option("--n", n, "baselines per set");
    rnd->add_option("--trials", trials, "number of random sets");
    rnd->add_option("--sample", sample, "random subsample of targets");

    auto* pg = app.add_subcommand("paramgen", "generate a shape from a parameterization");
    pg->add_option("--method", method, "airdbm, hicks-henne, cst, nurbs or parsec")->required();
    pg->add_option("--dv", dv, "design variables")->delimiter(',');
    pg->add_option("--knobs", knobs, "normalized knobs in [0, 1]")->delimiter(',');
    pg->add_flag("--describe", describe, "list the design variables and bounds");
    add_catalog(pg, false);
    add_baselines(pg);
    add_out_dir(pg);

    auto* polar = app.add_subcommand("polar", "aerodynamic sweep of one shape");
    add_catalog(polar, false);
    add_baselines(polar);
    add_out_dir(polar);
    ev.add(polar);
    polar->add_option("--target", target, "catalog name");
    polar->add_option("--file", file, "coordinate file");
    polar->add_option("--weights", weights, "morph the baselines with these weights")->delimiter(',');

    auto* opt = app.add_subcommand("optimize", "bi-objective AirDbM optimization");
    add_catalog(opt, false);
    add_baselines(opt);
    add_out_dir(opt);
    ga.add(opt);
    ev.add(opt);
    opt->add_flag("--replicate-paper", replicate, "full-scale settings: population 372, 1000 generations, XFOIL");
    opt->add_flag("--no-preruns", no_preruns, "skip the single-objective seeding runs");
    opt->add_option("--checkpoint-dir,--resume", checkpoint_dir, "checkpoint and resume directory");
    opt->add_option("--checkpoint-every", checkpoint_every, "generations between checkpoints");

    auto* rl = app.add_subcommand("rl-env", "geometry-generation environment");
    add_catalog(rl, false);
    add_baselines(rl);
    add_out_dir(rl);
    rl->add_option("--method", method, "generator behind the environment");
    rl->add_option("--target", target, "target shape name")->required();
    rl->add_option("--episodes", episodes, "hill-climb episodes");
    rl->add_option("--episode-length", episode_length, "steps per episode");
    rl->add_option("--agent", agent, "hillclimb or serve")->check(CLI::IsMember({"hillclimb", "serve"}));
    rl->add_option("--transport", transport, "stdio or socket")->check(CLI::IsMember({"stdio", "socket"}));
    rl->add_option("--port", port, "socket port (0 picks one)");
    rl->add_option("--max-connections", max_connections, "socket connections to serve (0 = unlimited)");
    rl->add_option("--sigma", sigma, "hill-climb perturbation scale");

    auto* srv = app.add_subcommand("serve", "HTTP API for the explorer");
    add_catalog(srv, true);
    add_baselines(srv);
    srv->add_option("--bind", bind, "listen address");
    srv->add_option("--port", port, "listen port");
    srv->add_option("--static", static_dir, "directory of built UI assets");
    srv->add_option("--max-seconds", max_seconds, "stop after this long");

    auto* rep = app.add_subcommand("report", "search-cost table and run summaries");
    add_catalog(rep, false);
    rep->add_option("--m", m, "catalog size (instead of --catalog)");
    rep->add_option("--n", n, "baseline count");
    rep->add_option("--dir", dir, "directory of JSON run reports to summarize");

    try {
        if (argc < 2) {
            std::cerr << app.help();
            return 2;
        }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto put = [&](const char* key, const auto& v) { req[key] = v; };
    auto put_if = [&](const char* key, const auto& v) {
        if (v)
            req[key] = *v;
    };
    auto put_str = [&](const char* key, const std::string& v) {
        if (!v.empty())
            req[key] = v;
    };

    put_str("catalog", catalog);
    put_str("out_dir", out_dir);
    put_if("resolution", resolution);
    if (!baselines.empty())
        req["baselines"] = baselines;
    const json gaj = ga.to_json();
    if (!gaj.empty())
        req["ga"] = gaj;
    put_if("threshold", threshold);
    if (no_lad)
        put("seed_least_deviation", false);
    put_if("sample", sample);

    if (fetch->parsed()) {
        workflow = "fetch";
        put_str("url", url);
        put("dest", dest);
    } else if (cat_build->parsed()) {
        workflow = "catalog_build";
        put("src", src);
        put_str("out", out);
    } else if (cat_info->parsed()) {
        workflow = "catalog_info";
        put("names", show_names);
    } else if (bl_export->parsed()) {
        workflow = "baselines_export";
        if (!names.empty())
            put("baselines", names);
        put_str("out", out);
    } else if (rec->parsed()) {
        workflow = "reconstruct";
        put_str("target", target);
        put_str("file", file);
        if (!warm.empty())
            put("warm_start", warm);
    } else if (rec_all->parsed()) {
        workflow = "reconstruct_all";
    } else if (sel->parsed()) {
        workflow = "select_baselines";
        put_if("n", n);
        put_str("resume_dir", resume_dir);
        put_str("out", out);
        put("evaluate_final", evaluate_final);
    } else if (rate->parsed()) {
        workflow = "rate_curve";
        if (!sizes.empty())
            put("sizes", sizes);
        put("warm_start", !no_warm);
    } else if (rnd->parsed()) {
        workflow = "random_baseline_experiment";
        put_if("n", n);
        put_if("trials", trials);
    } else if (pg->parsed()) {
        workflow = "paramgen";
        put("method", method);
        put("describe", describe);
        if (!dv.empty())
            put("dv", dv);
        if (!knobs.empty())
            put("knobs", knobs);
    } else if (polar->parsed()) {
        workflow = "polar";
        ev.apply(req);
        put_str("target", target);
        put_str("file", file);
        if (!weights.empty())
            put("weights", weights);
    } else if (opt->parsed()) {
        workflow = "optimize";
        ev.apply(req);
        put("replicate_paper", replicate);
        put("preruns", !no_preruns);
        put_str("checkpoint_dir", checkpoint_dir);
        put_if("checkpoint_every", checkpoint_every);
    } else if (rl->parsed()) {
        workflow = "rl_env";
        put_str("method", method);
        put("target", target);
        put_if("episodes", episodes);
        put_if("episode_length", episode_length);
        put("agent", agent);
        put("transport", transport);
        put_if("port", port);
        put_if("max_connections", max_connections);
        put_if("sigma", sigma);
    } else if (srv->parsed()) {
        workflow = "serve";
        put("bind", bind);
        put_if("port", port);
        put_str("static", static_dir);
        put_if("max_seconds", max_seconds);
    } else if (rep->parsed()) {
        workflow = "report";
        put_if("m", m);
        put_if("n", n);
        put_str("dir", dir);
    }

    if (!g.seed) {
        std::random_device rd;
        g.seed = ((static_cast<std::uint64_t>(rd()) << 32) ^ rd()) & 0xffffffffffffULL;
        if (!g.quiet)
            std::cerr << "seed: " << *g.seed << " (pass --seed " << *g.seed << " to repeat)\n";
    }
    req["seed"] = *g.seed;
    req["threads"] = g.threads;

    // The stdio agent protocol owns stdout.
    const bool stdout_busy = workflow == "rl_env" && agent == "serve" && transport == "stdio";
    if (!g.quiet)
        airdbm_set_log([](const char* line, void*) { std::fprintf(stderr, "%s\n", line); }, nullptr);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    char* response = nullptr;
    const airdbm_status status = airdbm_run_workflow(workflow.c_str(), req.dump().c_str(), &response);
    json report = json::object();
    if (response) {
        report = json::parse(response, nullptr, false);
        airdbm_free_string(response);
    }
    std::ostream& sink = stdout_busy ? std::cerr : std::cout;
    if (g.json_output) {
        sink << report.dump(2) << '\n';
    } else if (status == AIRDBM_OK) {
        if (stdout_busy) {
            sink << "session closed\n";
        } else if (workflow == "paramgen" && report.contains("coordinates") && out_dir.empty()) {
            std::cout << report["coordinates"].get<std::string>();
        } else {
            print_human(report);
        }
    }
    if (status != AIRDBM_OK)
        std::cerr << "error: " << airdbm_last_error() << '\n';
    return exit_code_for(status);
}
