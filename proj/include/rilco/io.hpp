#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rilco/mdp.hpp"

namespace rilco {

// Locale-independent shortest round-trip formatting (at most 17 significant
// digits) and strict parsing. parse_double throws InvariantError on junk.
std::string format_double(double x);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Plain-text MDP document:
///
///   ril-mdp v1
///   # free-form comment lines are allowed anywhere
///   states <S>
///   actions <A>
///   gamma <g>
///   horizon <T>
///   initial
///   <S numbers>
///   transition
///   <S*A lines of S numbers, (s, a) in row-major order>
///   reward
///   <S lines of A numbers>
///
/// Loading validates every MdpSpec invariant and throws InvariantError
/// naming the first one violated.
void write_mdp(std::ostream& out, const MdpSpec& mdp, std::string_view comment = {});
MdpSpec read_mdp(std::istream& in);

void save_mdp(const std::filesystem::path& path, const MdpSpec& mdp,
              std::string_view comment = {});
MdpSpec load_mdp(const std::filesystem::path& path);

// Policy table: header `ril-policy v1 states=<S> actions=<A>` then S rows.
void write_policy(std::ostream& out, const TabularPolicy& policy);
TabularPolicy read_policy(std::istream& in);

}  // namespace rilco
