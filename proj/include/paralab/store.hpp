#ifndef PARALAB_STORE_HPP
#define PARALAB_STORE_HPP

// Results store: <root>/runs/<id>/ holds a run's artifacts and manifest.json,
// <root>/index.jsonl holds one manifest per line. Index lines and artifacts
// are written once and never rewritten; every read re-checks the SHA-256
// digests recorded in the manifest.

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "paralab/audit.hpp"
#include "paralab/numeric.hpp"

namespace paralab {

#ifndef PARALAB_VERSION
#define PARALAB_VERSION "0.0.0"
#endif

inline constexpr const char* library_version = PARALAB_VERSION;

/// Raised when an artifact no longer matches its recorded digest.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha256: OpenSSL digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ArtifactRecord {
    std::string name;  // path relative to the run directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string id;
    std::vector<std::string> command_line;
    std::string subcommand;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string version = library_version;
    std::string timestamp;  // UTC, ISO 8601
    double wall_time_s = 0.0;
    int exit_code = 0;
    std::vector<ArtifactRecord> outputs;

    nlohmann::json to_json() const {
        nlohmann::json outs = nlohmann::json::array();
        for (const auto& a : outputs) outs.push_back({{"name", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
        return {{"id", id},           {"command_line", command_line}, {"subcommand", subcommand},
                {"parameters", parameters}, {"seed", seed},         {"version", version},
                {"timestamp", timestamp},   {"wall_time_s", wall_time_s}, {"exit_code", exit_code},
                {"outputs", outs}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.id = j.at("id").get<std::string>();
        m.command_line = j.at("command_line").get<std::vector<std::string>>();
        m.subcommand = j.at("subcommand").get<std::string>();
        m.parameters = j.at("parameters");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.timestamp = j.at("timestamp").get<std::string>();
        m.wall_time_s = j.at("wall_time_s").get<double>();
        m.exit_code = j.value("exit_code", 0);
        for (const auto& a : j.at("outputs"))
            m.outputs.push_back({a.at("name").get<std::string>(), a.at("sha256").get<std::string>(),
                                 a.at("bytes").get<std::size_t>()});
        return m;
    }
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Holds an exclusive advisory lock on a file for its lifetime.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& p) {
        fd_ = ::open(p.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw std::runtime_error("cannot open lock file " + p.string());
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw std::runtime_error("cannot lock " + p.string());
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

class ResultsStore {
public:
    explicit ResultsStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_ / "runs");
    }

    /// $PARALAB_STORE, else ./paralab-store.
    static std::filesystem::path default_root() {
        const char* env = std::getenv("PARALAB_STORE");
        return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("paralab-store");
    }

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path index_path() const { return root_ / "index.jsonl"; }
    std::filesystem::path run_dir(const std::string& id) const { return root_ / "runs" / id; }

    /// Fresh run id <subcommand>-<UTC time>-<random hex>; creates its directory.
    std::string begin_run(const std::string& subcommand) {
        std::random_device rd;
        for (int attempt = 0; attempt < 16; ++attempt) {
            std::string stamp = utc_timestamp();
            std::erase_if(stamp, [](char c) { return c == '-' || c == ':'; });
            std::ostringstream id;
            id << subcommand << '-' << stamp << '-' << std::hex << (static_cast<std::uint64_t>(rd()) << 32 | rd());
            if (std::filesystem::create_directories(run_dir(id.str()))) return id.str();
        }
        throw std::runtime_error("ResultsStore: cannot allocate a run directory");
    }

    /// Writes one artifact of a run; refuses to overwrite.
    ArtifactRecord write_artifact(const std::string& id, const std::string& name, const std::string& content) {
        const auto p = run_dir(id) / name;
        if (std::filesystem::exists(p)) throw std::runtime_error("ResultsStore: artifact already exists: " + name);
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("ResultsStore: cannot write " + p.string());
        return {name, sha256_hex(content), content.size()};
    }

    /// Writes manifest.json and appends the manifest to the index under lock.
    void commit(const RunManifest& m) {
        const std::string body = m.to_json().dump();
        {
            std::ofstream out(run_dir(m.id) / "manifest.json", std::ios::binary);
            out << m.to_json().dump(2) << '\n';
        }
        FileLock lock(root_ / "index.lock");
        for (const auto& existing : list())
            if (existing.id == m.id) throw std::runtime_error("ResultsStore: duplicate run id " + m.id);
        std::ofstream idx(index_path(), std::ios::app | std::ios::binary);
        idx << body << '\n';
        if (!idx) throw std::runtime_error("ResultsStore: cannot append to the index");
    }

    std::vector<RunManifest> list() const {
        std::vector<RunManifest> out;
        std::ifstream in(index_path());
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) out.push_back(RunManifest::from_json(nlohmann::json::parse(line)));
        return out;
    }

    /// The indexed manifest with this id; throws std::out_of_range if absent.
    RunManifest manifest(const std::string& id) const {
        for (auto& m : list())
            if (m.id == id) return m;
        throw std::out_of_range("ResultsStore: no manifest with id " + id);
    }

    /// Throws IntegrityError if any artifact is missing or altered.
    void verify(const RunManifest& m) const {
        for (const auto& a : m.outputs) read_verified(m, a);
    }

    std::string read_artifact(const std::string& id, const std::string& name) const {
        const RunManifest m = manifest(id);
        for (const auto& a : m.outputs)
            if (a.name == name) return read_verified(m, a);
        throw std::out_of_range("ResultsStore: run " + id + " has no artifact " + name);
    }

private:
    std::string read_verified(const RunManifest& m, const ArtifactRecord& a) const {
        const auto p = run_dir(m.id) / a.name;
        if (!std::filesystem::exists(p)) throw IntegrityError("artifact missing: " + m.id + "/" + a.name);
        std::string content = read_file(p);
        if (sha256_hex(content) != a.sha256) throw IntegrityError("digest mismatch: " + m.id + "/" + a.name);
        return content;
    }

    std::filesystem::path root_;
};

/// Consolidated report over the given runs: every *.audit.json artifact's
/// constants and pass flag, plus a plot-ready table with log columns.
struct Report {
    nlohmann::json json;
    std::string csv;
};

inline Report build_report(const ResultsStore& store, const std::vector<std::string>& ids) {
    Report r;
    r.json = {{"version", library_version}, {"runs", nlohmann::json::array()}, {"slope_table", nlohmann::json::array()}};
    std::ostringstream csv;
    csv << "run_id,audit,parameter,value,lhs,rhs_shape,log_value,log_lhs,pass\n";
    for (const auto& id : ids) {
        const RunManifest m = store.manifest(id);
        store.verify(m);
        nlohmann::json run = {{"id", m.id}, {"subcommand", m.subcommand}, {"parameters", m.parameters},
                              {"exit_code", m.exit_code}, {"audits", nlohmann::json::array()}};
        for (const auto& a : m.outputs) {
            const std::string suffix = ".audit.json";
            if (a.name.size() < suffix.size() || a.name.compare(a.name.size() - suffix.size(), suffix.size(), suffix) != 0)
                continue;
            const BoundAudit audit = BoundAudit::from_json(nlohmann::json::parse(store.read_artifact(m.id, a.name)));
            nlohmann::json consts = nlohmann::json::object();
            for (std::size_t i = 0; i < audit.constant_names.size(); ++i) consts[audit.constant_names[i]] = audit.fitted_constants[i];
            run["audits"].push_back({{"artifact", a.name}, {"name", audit.name}, {"pass", audit.pass}, {"fitted_constants", consts}});
            if (consts.contains("slope"))
                r.json["slope_table"].push_back({{"run_id", m.id}, {"audit", audit.name}, {"slope", consts["slope"]},
                                                 {"pass", audit.pass}});
            const std::string pname = audit.parameter_names.empty() ? "" : audit.parameter_names.front();
            for (std::size_t i = 0; i < audit.rows(); ++i) {
                const double v = audit.parameter_grid[i].empty() ? 0.0 : audit.parameter_grid[i].front();
                auto lg = [](double x) { return x > 0 ? format_double(std::log(x)) : std::string(); };
                csv << m.id << ',' << audit.name << ',' << pname << ',' << format_double(v) << ','
                    << format_double(audit.lhs[i]) << ',' << format_double(audit.rhs_shape[i]) << ',' << lg(v) << ','
                    << lg(audit.lhs[i]) << ',' << (audit.pass ? 1 : 0) << '\n';
            }
        }
        r.json["runs"].push_back(run);
    }
    r.csv = csv.str();
    return r;
}

}  // namespace paralab

#endif  // PARALAB_STORE_HPP
