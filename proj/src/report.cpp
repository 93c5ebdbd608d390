#include "procsim/experiment.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace procsim {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(ConfigError::io, {"cannot write " + path.string()});
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw ConfigError(ConfigError::io, {"failed writing " + path.string()});
}

json summary_json(const ReportBundle& b) {
    json j;
    j["master_seed"] = b.master_seed;
    j["horizon"] = b.horizon;
    j["replications"] = b.seeds.size();
    j["bootstrap_resamples"] = b.bootstrap_resamples;
    json seeds = json::array();
    for (std::size_t r = 0; r < b.seeds.size(); ++r) seeds.push_back({{"replication", r + 1}, {"seed", b.seeds[r]}});
    j["seeds"] = seeds;
    json pols = json::array();
    for (const auto& s : b.summaries) {
        pols.push_back({{"policy", s.policy},
                        {"n", s.n},
                        {"mean", s.mean},
                        {"median", s.median},
                        {"q1", s.q1},
                        {"q3", s.q3},
                        {"iqr", s.iqr},
                        {"ci95", {s.ci_low, s.ci_high}}});
    }
    j["policies"] = pols;
    j["config"] = b.config_echo.empty() ? json::object() : json::parse(b.config_echo, nullptr, true, true);
    return j;
}

}  // namespace

void write_reports(const ReportBundle& b, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError(ConfigError::io, {"cannot create " + dir.string() + ": " + ec.message()});

    const auto terminal_path = dir / "terminal.csv";
    auto terminal = open_out(terminal_path);
    terminal << "policy,replication,regret\n";
    for (const auto& r : b.results) {
        terminal << r.policy << ',' << r.replication << ',' << format_double(r.terminal_regret) << '\n';
    }
    close_out(terminal, terminal_path);

    const auto daily_path = dir / "daily.csv";
    auto daily = open_out(daily_path);
    daily << "policy,replication,day,cumulative_regret\n";
    for (const auto& r : b.results) {
        for (std::size_t d = 0; d < r.daily_cumulative.size(); ++d) {
            daily << r.policy << ',' << r.replication << ',' << d + 1 << ',' << format_double(r.daily_cumulative[d])
                  << '\n';
        }
    }
    close_out(daily, daily_path);

    write_summary(b, dir);
}

void write_summary(const ReportBundle& b, const std::filesystem::path& dir) {
    const auto summary_path = dir / "summary.json";
    auto summary = open_out(summary_path);
    summary << summary_json(b).dump(2) << '\n';
    close_out(summary, summary_path);
}

ReportBundle read_reports(const std::filesystem::path& dir) {
    ReportBundle b;
    const auto summary_path = dir / "summary.json";
    std::ifstream sin(summary_path, std::ios::binary);
    if (!sin) throw ConfigError(ConfigError::io, {"cannot read " + summary_path.string()});
    json s;
    try {
        s = json::parse(sin);
        b.master_seed = s.at("master_seed").get<std::uint64_t>();
        b.horizon = s.at("horizon").get<int>();
        b.bootstrap_resamples = s.at("bootstrap_resamples").get<int>();
        for (const auto& e : s.at("seeds")) b.seeds.push_back(e.at("seed").get<std::uint64_t>());
        for (const auto& p : s.at("policies")) b.policies.push_back(p.at("policy").get<std::string>());
        b.config_echo = s.at("config").dump();
    } catch (const json::exception& e) {
        throw ConfigError(ConfigError::parse, {summary_path.string() + ": " + e.what()});
    }

    const auto terminal_path = dir / "terminal.csv";
    std::ifstream tin(terminal_path, std::ios::binary);
    if (!tin) throw ConfigError(ConfigError::io, {"cannot read " + terminal_path.string()});
    std::string line;
    std::getline(tin, line);
    if (line != "policy,replication,regret") {
        throw ConfigError(ConfigError::parse, {terminal_path.string() + ": unexpected header"});
    }
    std::size_t row = 1;
    while (std::getline(tin, line)) {
        ++row;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        ReplicationResult r;
        bool ok = c1 != std::string::npos && c2 != std::string::npos;
        if (ok) {
            r.policy = line.substr(0, c1);
            const char* a = line.data() + c1 + 1;
            const char* a_end = line.data() + c2;
            ok = std::from_chars(a, a_end, r.replication).ptr == a_end;
            const char* v = line.data() + c2 + 1;
            const char* v_end = line.data() + line.size();
            ok = ok && std::from_chars(v, v_end, r.terminal_regret).ptr == v_end;
        }
        if (!ok) throw ConfigError(ConfigError::parse, {terminal_path.string() + ": bad row " + std::to_string(row)});
        if (r.replication >= 1 && static_cast<std::size_t>(r.replication) <= b.seeds.size()) {
            r.seed = b.seeds[static_cast<std::size_t>(r.replication - 1)];
        }
        b.results.push_back(std::move(r));
    }
    b.summaries = summarize(b.policies, b.results, b.master_seed, b.bootstrap_resamples);
    return b;
}

}  // namespace procsim
