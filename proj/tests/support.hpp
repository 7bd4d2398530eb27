#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lemur/registry.hpp"
#include "lemur/rng.hpp"

namespace lemur::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "lemur-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::uint32_t le(const std::string& s, std::size_t off, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s.at(off + i));
  return v;
}

// Entries of an uncompressed ZIP archive, walked through its local headers.
inline std::map<std::string, std::string> read_stored_zip(const std::string& bytes) {
  std::map<std::string, std::string> out;
  std::size_t off = 0;
  while (off + 4 <= bytes.size() && le(bytes, off, 4) == 0x04034b50) {
    if (le(bytes, off + 8, 2) != 0) throw std::runtime_error("compressed entry");
    const std::uint32_t size = le(bytes, off + 18, 4);
    const std::uint32_t name_len = le(bytes, off + 26, 2);
    const std::uint32_t extra_len = le(bytes, off + 28, 2);
    const std::string name = bytes.substr(off + 30, name_len);
    out[name] = bytes.substr(off + 30 + name_len + extra_len, size);
    off += 30 + name_len + extra_len + size;
  }
  if (off + 4 > bytes.size() || le(bytes, off, 4) != 0x02014b50) throw std::runtime_error("no central directory");
  return out;
}

inline boost::property_tree::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

// Visits every element below `tree`, passing its tag name.
template <class F>
void walk_xml(const boost::property_tree::ptree& tree, F&& visit) {
  for (const auto& [tag, child] : tree) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>" || tag == "<xmltext>") continue;
    visit(tag, child);
    walk_xml(child, visit);
  }
}

inline bool has_class(const boost::property_tree::ptree& el, const std::string& cls) {
  std::istringstream in(el.get<std::string>("<xmlattr>.class", ""));
  for (std::string word; in >> word;) {
    if (word == cls) return true;
  }
  return false;
}

inline std::size_t count_class(const boost::property_tree::ptree& tree, const std::string& cls) {
  std::size_t n = 0;
  walk_xml(tree, [&](const std::string&, const boost::property_tree::ptree& el) { n += has_class(el, cls) ? 1 : 0; });
  return n;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Starts `args` in `dir` with stdout and stderr redirected to cmd.stdout and
// cmd.stderr there, stdin from `input` (or /dev/null).
inline pid_t spawn_command(const std::vector<std::string>& args, const std::filesystem::path& dir,
                           const std::map<std::string, std::string>& env = {},
                           const std::filesystem::path& input = "/dev/null") {
  const auto out_path = dir / "cmd.stdout";
  const auto err_path = dir / "cmd.stderr";
  std::fflush(nullptr);
  const pid_t pid = ::fork();
  if (pid == 0) {
    for (const auto& [k, v] : env) ::setenv(k.c_str(), v.c_str(), 1);
    if (!std::freopen(out_path.c_str(), "w", stdout) || !std::freopen(err_path.c_str(), "w", stderr)) ::_exit(126);
    if (!std::freopen(input.c_str(), "r", stdin)) ::_exit(126);
    std::vector<std::string> copy = args;
    std::vector<char*> argv;
    for (std::string& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  return pid;
}

inline CommandResult wait_command(pid_t pid, const std::filesystem::path& dir) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  r.out = read_file(dir / "cmd.stdout");
  r.err = read_file(dir / "cmd.stderr");
  return r;
}

// Runs `args` to completion; see spawn_command.
inline CommandResult run_command(const std::vector<std::string>& args, const std::filesystem::path& dir,
                                 const std::map<std::string, std::string>& env = {},
                                 const std::filesystem::path& input = "/dev/null") {
  return wait_command(spawn_command(args, dir, env, input), dir);
}

// Random lowercase token for the field grammar, hyphen-separated parts.
inline std::string random_field(Rng& rng, bool mixed_case = false) {
  static const std::string lower = "abcdefghijklmnopqrstuvwxyz0123456789";
  static const std::string mixed = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  const std::string& alphabet = mixed_case ? mixed : lower;
  std::string s;
  const auto parts = rng.uniform_int(1, 3);
  for (std::int64_t p = 0; p < parts; ++p) {
    if (p) s.push_back('-');
    const auto len = rng.uniform_int(1, 6);
    for (std::int64_t i = 0; i < len; ++i) {
      s.push_back(alphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alphabet.size()) - 1))]);
    }
  }
  return s;
}

// A valid random trial document with a few epochs.
inline TrialDocument random_document(Rng& rng) {
  TrialDocument d;
  d.config = ConfigId{random_field(rng), random_field(rng), random_field(rng), random_field(rng, true)};
  d.transform = "t" + random_field(rng);
  d.prm["lr"] = std::exp(rng.uniform(std::log(1e-5), 0.0));
  d.prm["batch"] = std::int64_t{1} << rng.uniform_int(0, 8);
  d.prm["momentum"] = rng.uniform(0.0, 0.99);
  if (rng.uniform01() < 0.5) d.prm["note"] = std::string("x") + random_field(rng);
  const auto epochs = rng.uniform_int(1, 5);
  for (int e = 1; e <= epochs; ++e) {
    d.epochs.push_back(EpochResult{e, rng.uniform01(), rng.uniform_int(0, 5'000'000'000LL)});
  }
  d.codes[CodeKind::nn] = "net " + d.config.nn + "\n";
  d.codes[CodeKind::metric] = "metric " + d.config.metric + "\n";
  d.codes[CodeKind::transform] = "transform " + d.transform + "\n";
  return d;
}

}  // namespace lemur::testing
