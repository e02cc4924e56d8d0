#include "airdbm/aero.hpp"

#include "airdbm/dataset.hpp"
#include "airdbm/error.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fcntl.h>
#include <signal.h>
#include <sstream>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace airdbm {

namespace fs = std::filesystem;

std::string find_executable(const std::string& name)
{
    if (name.empty())
        return {};
    if (name.find('/') != std::string::npos)
        return ::access(name.c_str(), X_OK) == 0 ? name : std::string();
    const char* path = std::getenv("PATH");
    std::stringstream dirs(path ? path : "");
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
        const auto candidate = (fs::path(dir.empty() ? "." : dir) / name).string();
        if (::access(candidate.c_str(), X_OK) == 0)
            return candidate;
    }
    return {};
}

std::vector<XfoilRow> parse_xfoil_polar(std::string_view text)
{
    std::vector<XfoilRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool table = false;
    while (std::getline(in, line)) {
        if (!table) {
            if (line.find("------") != std::string::npos)
                table = true;
            continue;
        }
        std::istringstream ls(line);
        std::vector<double> v;
        double x = 0.0;
        while (ls >> x)
            v.push_back(x);
        if (!ls.eof() || v.size() < 4)
            continue;
        rows.push_back({v[0], v[1], v[2], v[3]});
    }
    return rows;
}

namespace {

struct RunOutcome {
    bool started = false;
    bool timed_out = false;
    int status = -1;
};

// Runs `exe` with stdin from `script` inside `dir`, killing its process group
// after `timeout` seconds.
RunOutcome run_with_timeout(const std::string& exe, const fs::path& dir, const fs::path& script, double timeout)
{
    RunOutcome out;
    const pid_t pid = ::fork();
    if (pid < 0)
        return out;
    if (pid == 0) {
        ::setpgid(0, 0);
        if (::chdir(dir.c_str()) != 0)
            ::_exit(127);
        const int in = ::open(script.c_str(), O_RDONLY);
        const int log = ::open("xfoil.log", O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (in < 0 || log < 0)
            ::_exit(127);
        ::dup2(in, STDIN_FILENO);
        ::dup2(log, STDOUT_FILENO);
        ::dup2(log, STDERR_FILENO);
        ::execl(exe.c_str(), exe.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out.started = true;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
    for (;;) {
        int status = 0;
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) {
            out.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            return out;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            out.timed_out = true;
            return out;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

fs::path make_work_dir(const fs::path& root)
{
    static std::atomic<unsigned long> counter{0};
    const fs::path base = root.empty() ? fs::temp_directory_path() : root;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const auto dir = base / ("airdbm-xfoil-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::error_code ec;
        if (fs::create_directories(dir, ec))
            return dir;
    }
    fail(ErrorCode::io_error, "cannot create a work directory under " + base.string());
}

bool sane(const XfoilRow& r)
{
    return std::isfinite(r.cl) && std::isfinite(r.cd) && std::isfinite(r.cdp) && r.cd > 0.0 && r.cdp >= 0.0 && r.cdp <= r.cd;
}

} // namespace

XfoilEvaluator::XfoilEvaluator(XfoilOptions options) : options_(std::move(options)) {}

void XfoilEvaluator::check_available() const
{
    if (find_executable(options_.executable).empty())
        fail(ErrorCode::evaluator_unavailable, "XFOIL executable '" + options_.executable + "' not found");
}

std::string XfoilEvaluator::command_script(const std::string& coord_file, const std::string& polar_file,
                                           const EvalConfig& config, const std::vector<double>& alphas, bool init) const
{
    char buf[128];
    std::string s = "PLOP\nG\n\n";
    s += "LOAD " + coord_file + "\n";
    s += "PPAR\nN " + std::to_string(options_.panels) + "\n\n\n";
    s += "OPER\n";
    std::snprintf(buf, sizeof buf, "VISC %.10g\nMACH %.10g\nITER %d\n", config.reynolds, config.mach, options_.iterations);
    s += buf;
    s += "PACC\n" + polar_file + "\n\n";
    if (init)
        s += "INIT\n";
    if (alphas.size() == 1) {
        std::snprintf(buf, sizeof buf, "ALFA %.10g\n", alphas.front());
    } else {
        std::snprintf(buf, sizeof buf, "ASEQ %.10g %.10g %.10g\n", alphas.front(), alphas.back(), config.alpha_step);
    }
    s += buf;
    s += "PACC\n\nQUIT\n";
    return s;
}

std::vector<PolarPoint> XfoilEvaluator::polar(const SeligVector& shape, const EvalConfig& config) const
{
    const std::string exe = find_executable(options_.executable);
    if (exe.empty())
        fail(ErrorCode::evaluator_unavailable, "XFOIL executable '" + options_.executable + "' not found");
    const auto alphas = config.alphas();
    std::vector<PolarPoint> out;
    for (double a : alphas)
        out.push_back({a, 0.0, 0.0, false});

    const fs::path dir = make_work_dir(options_.work_root);
    struct Cleanup {
        fs::path dir;
        bool keep;
        ~Cleanup()
        {
            std::error_code ec;
            if (!keep)
                fs::remove_all(dir, ec);
        }
    } cleanup{dir, options_.keep_files};

    write_text_file_atomic(dir / "shape.dat", to_coordinate_text(shape, "airdbm"));

    auto absorb = [&](const std::string& polar_name) {
        std::error_code ec;
        if (!fs::exists(dir / polar_name, ec))
            return;
        for (const auto& row : parse_xfoil_polar(read_text_file(dir / polar_name))) {
            for (auto& p : out) {
                if (!p.converged && std::abs(p.alpha - row.alpha) < 5e-4 && sane(row)) {
                    p.cl = row.cl;
                    p.cd = row.cd;
                    p.converged = true;
                }
            }
        }
    };

    write_text_file_atomic(dir / "sweep.in", command_script("shape.dat", "sweep.pol", config, alphas, false));
    const auto sweep = run_with_timeout(exe, dir, dir / "sweep.in", options_.point_timeout_seconds * static_cast<double>(alphas.size()));
    if (!sweep.started)
        fail(ErrorCode::evaluator_unavailable, "cannot start " + exe);
    absorb("sweep.pol");

    for (int attempt = 1; attempt <= config.max_retries; ++attempt) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (out[k].converged)
                continue;
            const std::string tag = std::to_string(attempt) + "_" + std::to_string(k);
            write_text_file_atomic(dir / ("retry" + tag + ".in"),
                                   command_script("shape.dat", "retry" + tag + ".pol", config, {out[k].alpha}, true));
            run_with_timeout(exe, dir, dir / ("retry" + tag + ".in"), options_.point_timeout_seconds);
            absorb("retry" + tag + ".pol");
        }
    }
    return out;
}

} // namespace airdbm
