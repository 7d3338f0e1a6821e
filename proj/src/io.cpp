#include "rilco/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "rilco/errors.hpp"

namespace rilco {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InvariantError("numeric field is a decimal number", "'" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text) {
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvariantError("integer field is an integer", "'" + std::string(text) + "'");
  }
  return value;
}

namespace {

// Whitespace tokenizer that skips '#' comment lines.
class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() == '#') continue;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }

  const std::string& next(const char* what) {
    if (pos_ >= tokens_.size()) {
      throw InvariantError("document is complete", std::string("missing ") + what);
    }
    return tokens_[pos_++];
  }

  void expect(const char* keyword) {
    const std::string& tok = next(keyword);
    if (tok != keyword) {
      throw InvariantError("document layout", std::string("expected '") + keyword + "', got '" +
                                                  tok + "'");
    }
  }

  double number(const char* what) { return parse_double(next(what)); }
  long long integer(const char* what) { return parse_int(next(what)); }
  bool done() const { return pos_ == tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_mdp(std::ostream& out, const MdpSpec& mdp, std::string_view comment) {
  out << "ril-mdp v1\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "states " << mdp.n_states() << '\n';
  out << "actions " << mdp.n_actions() << '\n';
  out << "gamma " << format_double(mdp.gamma()) << '\n';
  out << "horizon " << mdp.horizon() << '\n';
  auto write_row = [&out](std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << format_double(row[i]);
    }
    out << '\n';
  };
  out << "initial\n";
  write_row(mdp.initial());
  out << "transition\n";
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) write_row(mdp.transition(s, a));
  }
  out << "reward\n";
  for (int s = 0; s < mdp.n_states(); ++s) write_row(mdp.reward().row(s));
}

MdpSpec read_mdp(std::istream& in) {
  Tokens tok(in);
  tok.expect("ril-mdp");
  tok.expect("v1");
  tok.expect("states");
  const long long ns = tok.integer("state count");
  tok.expect("actions");
  const long long na = tok.integer("action count");
  if (ns <= 0 || na <= 0 || ns > 100000 || na > 100000) {
    throw InvariantError("dimensions are positive", "states/actions out of range");
  }
  tok.expect("gamma");
  const double gamma = tok.number("gamma");
  tok.expect("horizon");
  const long long horizon = tok.integer("horizon");

  tok.expect("initial");
  std::vector<double> initial(ns);
  for (auto& x : initial) x = tok.number("initial entry");
  tok.expect("transition");
  std::vector<double> transition(static_cast<std::size_t>(ns * na * ns));
  for (auto& x : transition) x = tok.number("transition entry");
  tok.expect("reward");
  Table reward(ns, na);
  for (auto& x : reward.flat()) x = tok.number("reward entry");
  if (!tok.done()) throw InvariantError("document layout", "trailing tokens after reward table");
  return MdpSpec(static_cast<int>(ns), static_cast<int>(na), std::move(transition),
                 std::move(initial), std::move(reward), gamma, static_cast<int>(horizon));
}

void save_mdp(const std::filesystem::path& path, const MdpSpec& mdp, std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_mdp(out, mdp, comment);
}

MdpSpec load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_mdp(in);
}

void write_policy(std::ostream& out, const TabularPolicy& policy) {
  out << "ril-policy v1 states=" << policy.probs.rows() << " actions=" << policy.probs.cols()
      << '\n';
  for (std::size_t s = 0; s < policy.probs.rows(); ++s) {
    const auto row = policy.probs.row(s);
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (a) out << ' ';
      out << format_double(row[a]);
    }
    out << '\n';
  }
}

TabularPolicy read_policy(std::istream& in) {
  std::string magic, version, states, actions;
  in >> magic >> version >> states >> actions;
  if (magic != "ril-policy" || version != "v1" || states.rfind("states=", 0) != 0 ||
      actions.rfind("actions=", 0) != 0) {
    throw InvariantError("document layout", "bad policy header");
  }
  const long long ns = parse_int(std::string_view(states).substr(7));
  const long long na = parse_int(std::string_view(actions).substr(8));
  TabularPolicy pi{Table(ns, na)};
  for (auto& x : pi.probs.flat()) {
    std::string tok;
    if (!(in >> tok)) throw InvariantError("document is complete", "policy table truncated");
    x = parse_double(tok);
  }
  pi.validate();
  return pi;
}

}  // namespace rilco
