#include <measp/engine.hpp>
#include <measp/io.hpp>
#include <measp/semantics.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <ctime>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <poll.h>
#include <sys/resource.h>
#include <sys/time.h>
#include <sys/wait.h>
#include <unistd.h>

namespace measp {

void Limits::validate() const {
    if (!(cpu_seconds > 0)) throw std::invalid_argument("cpu limit must be positive");
    if (memory_bytes == 0) throw std::invalid_argument("memory limit must be positive");
}

void EngineSpec::validate() const {
    if (name.empty()) throw RegistryError("engine without a name");
    if (kind == EngineKind::External && command.empty())
        throw RegistryError("external engine '" + name + "' has no command");
    if (kind == EngineKind::BuiltinOracle && max_atoms == 0)
        throw RegistryError("engine '" + name + "': max_atoms must be positive");
    if (cpu_limit && !(*cpu_limit > 0)) throw RegistryError("engine '" + name + "': cpu_limit must be positive");
}

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// ---------------------------------------------------------------- registry

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_bool(std::string_view v, const std::string& where) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw RegistryError(where + "expected true/false, got '" + std::string(v) + "'");
}

} // namespace

EngineRegistry EngineRegistry::parse(std::string_view text) {
    EngineRegistry reg;
    std::optional<EngineSpec> cur;
    std::size_t lineNo = 0, start = 0;
    auto flush = [&] {
        if (cur) reg.add(std::move(*cur));
        cur.reset();
    };
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;
        const std::string where = "registry line " + std::to_string(lineNo) + ": ";
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || !line.starts_with("[engine "))
                throw RegistryError(where + "expected '[engine <name>]'");
            flush();
            cur.emplace();
            cur->name = std::string(trim(line.substr(8, line.size() - 9)));
            if (cur->name.empty() || cur->name.find_first_of(", \t") != std::string::npos)
                throw RegistryError(where + "invalid engine name");
            continue;
        }
        if (!cur) throw RegistryError(where + "setting outside an [engine] section");
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw RegistryError(where + "expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto val = trim(line.substr(eq + 1));
        if (key == "kind") {
            if (val == "external") cur->kind = EngineKind::External;
            else if (val == "builtin-oracle") cur->kind = EngineKind::BuiltinOracle;
            else throw RegistryError(where + "unknown kind '" + std::string(val) + "'");
        }
        else if (key == "command") cur->command = std::string(val);
        else if (key == "disjunctive") cur->handles_disjunctive = parse_bool(val, where);
        else if (key == "answer") cur->answer_rule.answer_prefix = std::string(val);
        else if (key == "inconsistent") cur->answer_rule.inconsistent_prefix = std::string(val);
        else if (key == "exit_codes") cur->answer_rule.exit_codes = parse_bool(val, where);
        else if (key == "max_atoms") {
            try {
                cur->max_atoms = std::stoul(std::string(val));
            }
            catch (const std::exception&) {
                throw RegistryError(where + "max_atoms must be a number");
            }
        }
        else if (key == "cpu_limit") {
            try {
                std::size_t used = 0;
                cur->cpu_limit   = std::stod(std::string(val), &used);
                if (used != val.size()) throw std::invalid_argument("trailing text");
            }
            catch (const std::exception&) {
                throw RegistryError(where + "cpu_limit must be a number of seconds");
            }
        }
        else if (key == "require") {
            try {
                cur->require = Condition::compile(val, FeatureManifest::canonical().resolver());
            }
            catch (const FormulaError& e) {
                throw RegistryError(where + e.what());
            }
        }
        else if (key == "off_speciality") {
            try {
                cur->off_speciality = parse_run_status(val);
            }
            catch (const std::invalid_argument& e) {
                throw RegistryError(where + e.what());
            }
            if (cur->off_speciality == RunStatus::Solved)
                throw RegistryError(where + "off_speciality cannot be 'solved'");
        }
        else throw RegistryError(where + "unknown key '" + std::string(key) + "'");
    }
    flush();
    return reg;
}

EngineRegistry EngineRegistry::load(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    }
    catch (const std::exception&) {
        throw RegistryError("cannot read engine registry '" + path + "'");
    }
    return parse(text);
}

EngineRegistry EngineRegistry::builtin() {
    EngineRegistry r;
    EngineSpec     oracle;
    oracle.name                = "oracle";
    oracle.kind                = EngineKind::BuiltinOracle;
    oracle.handles_disjunctive = true;
    r.add(std::move(oracle));
    return r;
}

void EngineRegistry::add(EngineSpec spec) {
    spec.validate();
    if (contains(spec.name)) throw RegistryError("duplicate engine '" + spec.name + "'");
    engines_.push_back(std::move(spec));
}

const EngineSpec& EngineRegistry::get(std::string_view name) const {
    for (const auto& e : engines_)
        if (e.name == name) return e;
    throw RegistryError("engine '" + std::string(name) + "' not found in registry");
}

bool EngineRegistry::contains(std::string_view name) const {
    return std::any_of(engines_.begin(), engines_.end(), [&](const EngineSpec& e) { return e.name == name; });
}

std::vector<std::string> EngineRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& e : engines_) out.push_back(e.name);
    return out;
}

std::map<std::string, bool> EngineRegistry::disjunctive_flags() const {
    std::map<std::string, bool> out;
    for (const auto& e : engines_) out[e.name] = e.handles_disjunctive;
    return out;
}

// ---------------------------------------------------------------- builtin

namespace {

std::uint64_t estimated_bytes(const GroundProgram& p) {
    std::uint64_t bytes = sizeof(GroundProgram) + p.num_atoms() * (sizeof(Atom) + 48);
    for (const auto& r : p.rules())
        bytes += sizeof(Rule) + r.head.size() * sizeof(AtomId) + r.body.size() * sizeof(Literal);
    return bytes;
}

// Microsecond resolution keeps CSVs readable; clocks are not finer in practice.
double to_micros(double s) { return std::round(s * 1e6) / 1e6; }

Limits effective_limits(const EngineSpec& e, Limits l) {
    if (e.cpu_limit) l.cpu_seconds = std::min(l.cpu_seconds, *e.cpu_limit);
    return l;
}

RunOutcome timed_out(const Limits& l) { return {RunStatus::Timeout, l.cpu_seconds, Answer::Unknown}; }

} // namespace

RunResult run_builtin(const EngineSpec& e, const GroundProgram& p, const Limits& limits) {
    const Limits l = effective_limits(e, limits);
    l.validate();
    const auto   wall0 = std::chrono::steady_clock::now();
    const double cpu0  = thread_cpu_seconds();
    RunResult    res;
    auto used    = [&] { return thread_cpu_seconds() - cpu0; };
    auto finish  = [&](RunOutcome o) {
        o.cpu_seconds    = o.status == RunStatus::Timeout ? o.cpu_seconds : to_micros(o.cpu_seconds);
        res.outcome      = o;
        res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        return res;
    };

    if (estimated_bytes(p) > l.memory_bytes) {
        res.diagnostic = "program exceeds the memory limit";
        return finish({RunStatus::Memout, used(), Answer::Unknown});
    }
    if (e.require) {
        auto q = extract_base_quantities(p);
        auto v = compute_features(q, FeatureManifest::canonical());
        if (!e.require->holds(condition_slots(q, v))) {
            res.diagnostic = "instance outside the engine's speciality";
            if (e.off_speciality == RunStatus::Timeout) return finish(timed_out(l));
            return finish({e.off_speciality, used(), Answer::Unknown});
        }
    }
    if (used() > l.cpu_seconds) return finish(timed_out(l));
    EnumerateOptions opts;
    opts.max_atoms   = e.max_atoms;
    opts.limit       = 1;
    opts.should_stop = [&] { return used() > l.cpu_seconds; };
    try {
        auto found = enumerate_answer_sets(p, opts);
        double cpu = used();
        if (cpu > l.cpu_seconds) return finish(timed_out(l));
        if (found.empty()) return finish({RunStatus::Solved, cpu, Answer::Inconsistent});
        res.witness = found.front().names(p);
        return finish({RunStatus::Solved, cpu, Answer::AnswerSetFound});
    }
    catch (const OracleInterrupted&) {
        return finish(timed_out(l));
    }
    catch (const OracleScaleExceeded& ex) {
        res.diagnostic = ex.what();
        return finish({RunStatus::Error, used(), Answer::Unknown});
    }
    catch (const std::bad_alloc&) {
        res.diagnostic = "out of memory";
        return finish({RunStatus::Memout, used(), Answer::Unknown});
    }
}

// ---------------------------------------------------------------- external

namespace {

std::vector<std::string> split_command(std::string_view cmd) {
    std::vector<std::string> out;
    std::string cur;
    bool        inToken = false;
    char        quote   = 0;
    for (std::size_t i = 0; i < cmd.size(); ++i) {
        char c = cmd[i];
        if (quote) {
            if (c == quote) quote = 0;
            else if (c == '\\' && quote == '"' && i + 1 < cmd.size()) cur += cmd[++i];
            else cur += c;
        }
        else if (c == '\'' || c == '"') {
            quote   = c;
            inToken = true;
        }
        else if (c == '\\' && i + 1 < cmd.size()) {
            cur += cmd[++i];
            inToken = true;
        }
        else if (std::isspace(static_cast<unsigned char>(c))) {
            if (inToken) out.push_back(std::move(cur));
            cur.clear();
            inToken = false;
        }
        else {
            cur += c;
            inToken = true;
        }
    }
    if (quote) throw RegistryError("unterminated quote in command '" + std::string(cmd) + "'");
    if (inToken) out.push_back(std::move(cur));
    return out;
}

std::string substitute(std::string token, const std::string& path) {
    static constexpr std::string_view key = "{instance}";
    for (auto pos = token.find(key); pos != std::string::npos; pos = token.find(key, pos + path.size()))
        token.replace(pos, key.size(), path);
    return token;
}

double seconds(const timeval& tv) { return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) * 1e-6; }

// Classifies complete stdout lines as they stream in.
struct OutputScanner {
    const AnswerRule& rule;
    std::string       partial;
    Answer            answer = Answer::Unknown;

    void feed(std::string_view chunk) {
        for (char c : chunk) {
            if (c == '\n') {
                line(partial);
                partial.clear();
            }
            else if (partial.size() < 4096) {
                partial += c;
            }
        }
    }
    void finish() {
        if (!partial.empty()) line(partial);
        partial.clear();
    }
    void line(std::string_view l) {
        if (answer != Answer::Unknown) return;
        if (!rule.answer_prefix.empty() && l.starts_with(rule.answer_prefix)) answer = Answer::AnswerSetFound;
        else if (!rule.inconsistent_prefix.empty() && l.starts_with(rule.inconsistent_prefix))
            answer = Answer::Inconsistent;
    }
};

bool mentions_memory_exhaustion(const std::string& err) {
    static constexpr std::string_view needles[] = {"bad_alloc", "out of memory", "Out of memory",
                                                   "Cannot allocate memory", "MemoryError", "memory exhausted"};
    return std::any_of(std::begin(needles), std::end(needles),
                       [&](std::string_view n) { return err.find(n) != std::string::npos; });
}

RunResult run_external(const EngineSpec& e, const std::string& path, const Limits& l) {
    auto args = split_command(e.command);
    if (args.empty()) throw RegistryError("engine '" + e.name + "' has an empty command");
    for (auto& a : args) a = substitute(std::move(a), path);
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    int outPipe[2], errPipe[2];
    if (pipe2(outPipe, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
    if (pipe2(errPipe, O_CLOEXEC) != 0) {
        close(outPipe[0]);
        close(outPipe[1]);
        throw std::system_error(errno, std::generic_category(), "pipe");
    }
    const rlim_t cpuSoft = static_cast<rlim_t>(std::ceil(l.cpu_seconds));
    const rlim_t memLim  = static_cast<rlim_t>(l.memory_bytes);
    const auto   wall0   = std::chrono::steady_clock::now();

    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {outPipe[0], outPipe[1], errPipe[0], errPipe[1]}) close(fd);
        throw std::system_error(errno, std::generic_category(), "fork");
    }
    if (pid == 0) {
        // child: only async-signal-safe calls until exec
        rlimit cpu{cpuSoft, cpuSoft + 1};
        rlimit mem{memLim, memLim};
        setrlimit(RLIMIT_CPU, &cpu);
        setrlimit(RLIMIT_AS, &mem);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        dup2(outPipe[1], STDOUT_FILENO);
        dup2(errPipe[1], STDERR_FILENO);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(outPipe[1]);
    close(errPipe[1]);

    OutputScanner scan{e.answer_rule, {}, Answer::Unknown};
    std::string   errTail;
    const double  wallGuard = 3 * l.cpu_seconds + 5;
    bool          wallKilled = false;
    pollfd        fds[2] = {{outPipe[0], POLLIN, 0}, {errPipe[0], POLLIN, 0}};
    int           open_  = 2;
    char          buf[65536];
    while (open_ > 0) {
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        if (!wallKilled && elapsed > wallGuard) {
            kill(pid, SIGKILL);
            wallKilled = true;
        }
        int rc = poll(fds, 2, 200);
        if (rc < 0 && errno != EINTR) break;
        for (int k = 0; k != 2; ++k) {
            if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t n = read(fds[k].fd, buf, sizeof buf);
            if (n > 0) {
                if (k == 0) scan.feed({buf, static_cast<std::size_t>(n)});
                else {
                    errTail.append(buf, static_cast<std::size_t>(n));
                    if (errTail.size() > 65536) errTail.erase(0, errTail.size() - 65536);
                }
            }
            else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
                close(fds[k].fd);
                fds[k].fd = -1;
                --open_;
            }
        }
    }
    for (auto& f : fds)
        if (f.fd >= 0) close(f.fd);
    scan.finish();

    int     status = 0;
    rusage  ru{};
    while (wait4(pid, &status, 0, &ru) < 0 && errno == EINTR) {}
    RunResult res;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    const double cpu = to_micros(seconds(ru.ru_utime) + seconds(ru.ru_stime));
    const double rss = static_cast<double>(ru.ru_maxrss) * 1024.0;
    auto out = [&](RunStatus s, Answer a = Answer::Unknown) {
        res.outcome = {s, s == RunStatus::Timeout ? l.cpu_seconds : cpu, a};
        return res;
    };

    if (wallKilled) {
        res.diagnostic = "wall-clock guard exceeded";
        return out(RunStatus::Timeout);
    }
    if (cpu > l.cpu_seconds) return out(RunStatus::Timeout);
    if (WIFSIGNALED(status) && WTERMSIG(status) == SIGXCPU) return out(RunStatus::Timeout);
    const bool abnormal = WIFSIGNALED(status) || (WIFEXITED(status) && WEXITSTATUS(status) != 0 &&
                                                  !(e.answer_rule.exit_codes &&
                                                    (WEXITSTATUS(status) == 10 || WEXITSTATUS(status) == 20)));
    if (abnormal && (mentions_memory_exhaustion(errTail) || rss >= 0.9 * static_cast<double>(l.memory_bytes))) {
        res.diagnostic = "memory limit exceeded";
        return out(RunStatus::Memout);
    }
    if (WIFSIGNALED(status)) {
        res.diagnostic = "terminated by signal " + std::to_string(WTERMSIG(status));
        return out(RunStatus::Error);
    }
    const int code = WEXITSTATUS(status);
    if (code == 127) {
        res.diagnostic = "cannot execute '" + args.front() + "'";
        return out(RunStatus::Error);
    }
    Answer answer = scan.answer;
    if (answer == Answer::Unknown && e.answer_rule.exit_codes) {
        if (code == 10) answer = Answer::AnswerSetFound;
        else if (code == 20) answer = Answer::Inconsistent;
    }
    if (answer == Answer::Unknown) {
        res.diagnostic = "no recognizable answer (exit code " + std::to_string(code) + ")";
        return out(RunStatus::Error);
    }
    if (abnormal) {
        res.diagnostic = "answer reported but exit code " + std::to_string(code);
        return out(RunStatus::Error);
    }
    return out(RunStatus::Solved, answer);
}

} // namespace

RunResult run_engine(const EngineSpec& e, const std::string& instance_path, const Limits& limits) {
    const Limits l = effective_limits(e, limits);
    l.validate();
    {
        std::ifstream probe(instance_path);
        if (!probe) throw std::runtime_error("instance '" + instance_path + "' is unreadable");
    }
    if (e.kind == EngineKind::External) return run_external(e, instance_path, l);

    const double cpu0  = thread_cpu_seconds();
    const auto   wall0 = std::chrono::steady_clock::now();
    GroundProgram p;
    try {
        p = read_program_file(instance_path);
    }
    catch (const ParseError& ex) {
        RunResult r;
        r.outcome    = {RunStatus::Error, to_micros(thread_cpu_seconds() - cpu0), Answer::Unknown};
        r.diagnostic = std::string("parse error: ") + ex.what();
        return r;
    }
    const double parseCpu = thread_cpu_seconds() - cpu0;
    if (parseCpu > l.cpu_seconds) {
        RunResult r;
        r.outcome = timed_out(l);
        return r;
    }
    Limits rest = l;
    rest.cpu_seconds = l.cpu_seconds - parseCpu;
    RunResult r = run_builtin(e, p, rest);
    if (r.outcome.status == RunStatus::Timeout) r.outcome.cpu_seconds = l.cpu_seconds;
    else r.outcome.cpu_seconds = to_micros(r.outcome.cpu_seconds + parseCpu);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return r;
}

} // namespace measp
