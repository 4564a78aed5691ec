// Helpers shared by the unit tests: random programs and data paths.
#pragma once

#include <measp/ground_program.hpp>
#include <measp/selection.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>

namespace measp::testing {

inline std::string data_path(const std::string& rel) { return std::string(MEASP_TEST_DATA) + "/" + rel; }

struct ProgramShape {
    std::size_t atoms     = 6;
    std::size_t rules     = 8;
    std::size_t max_head  = 2;
    std::size_t max_body  = 3;
    double      p_negated = 0.4;
};

/// Random ground program over atoms p(0)..p(atoms-1) (not all need occur).
inline GroundProgram random_program(std::mt19937_64& rng, const ProgramShape& s) {
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    ProgramBuilder b;
    for (std::size_t r = 0; r != s.rules; ++r) {
        std::vector<Atom>                  head;
        std::vector<std::pair<Atom, bool>> body;
        std::size_t h = pick(s.max_head + 1), m = pick(s.max_body + 1);
        if (h == 0 && m == 0) h = 1;
        for (std::size_t k = 0; k != h; ++k) head.push_back({"p", {std::to_string(pick(s.atoms))}});
        for (std::size_t k = 0; k != m; ++k)
            body.emplace_back(Atom{"p", {std::to_string(pick(s.atoms))}},
                              static_cast<double>(rng() % 1000) < 1000 * s.p_negated);
        b.add_rule(head, body);
    }
    return std::move(b).build();
}

inline GroundProgram example_program() {
    return parse_ground_program("a | b :- c.  b :- not a, not c.  a | c :- not b.  k :- a.  k :- b.");
}

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("measp-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&)            = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    /// Writes `text` to `rel` (creating parent directories) and returns the full path.
    std::string write(const std::string& rel, const std::string& text) const {
        auto p = path_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream(p) << text;
        return p.string();
    }

private:
    std::filesystem::path path_;
};

/// Matrix over instances i0..i{n-1}; `time(s, i)` gives the solve time or nullopt for a timeout.
inline PerformanceMatrix make_matrix(const std::vector<std::string>& solvers, std::size_t n,
                                     const std::function<std::optional<double>(std::size_t, std::size_t)>& time,
                                     double limit = 600) {
    std::vector<InstanceInfo> inst;
    for (std::size_t i = 0; i != n; ++i) inst.push_back({"i" + std::to_string(i), "fam", ComplexityClass::NP});
    PerformanceMatrix m(solvers, inst);
    for (std::size_t s = 0; s != solvers.size(); ++s)
        for (std::size_t i = 0; i != n; ++i) {
            auto t = time(s, i);
            m.set(s, i, t ? RunOutcome{RunStatus::Solved, *t, Answer::AnswerSetFound}
                          : RunOutcome{RunStatus::Timeout, limit, Answer::Unknown});
        }
    return m;
}

} // namespace measp::testing
