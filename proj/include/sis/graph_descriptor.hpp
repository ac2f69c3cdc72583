#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sis/errors.hpp"
#include "sis/graph.hpp"
#include "sis/rng.hpp"

namespace sis {

// Graph descriptors:
//   star:N  cycle:N  clique:N  path:N  spider:ARMS,LEN
//   er:N,P[,SEED]  ws:N,K,P[,SEED]  file:PATH
// The colon may be dropped for single-integer families ("star2000", "path3").

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParameterError("bad " + what + " '" + s + "' in graph descriptor");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ParameterError("bad " + what + " '" + s + "' in graph descriptor");
  }
}

inline double parse_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ParameterError("bad " + what + " '" + s + "' in graph descriptor");
  return v;
}

}  // namespace detail

inline Graph graph_from_descriptor(const std::string& spec) {
  std::string family, rest;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    family = spec.substr(0, colon);
    rest = spec.substr(colon + 1);
  } else {
    std::size_t k = 0;
    while (k < spec.size() && std::isalpha(static_cast<unsigned char>(spec[k]))) ++k;
    family = spec.substr(0, k);
    rest = spec.substr(k);
  }
  if (family == "file") {
    if (rest.empty()) throw ParameterError("file: descriptor needs a path");
    return load_edge_list(rest);
  }
  const auto args = detail::split(rest, ',');
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (rest.empty() || args.size() < lo || args.size() > hi)
      throw ParameterError("graph descriptor '" + spec + "' has the wrong number of arguments");
  };
  auto count = [&](std::size_t k) { return detail::parse_count(args[k], "size"); };
  auto real = [&](std::size_t k) { return detail::parse_real(args[k], "probability"); };
  auto seed = [&](std::size_t k) {
    return args.size() > k ? detail::parse_count(args[k], "seed") : kDefaultSeed;
  };

  if (family == "star") { need(1, 1); return star(count(0)); }
  if (family == "cycle") { need(1, 1); return cycle(count(0)); }
  if (family == "clique") { need(1, 1); return clique(count(0)); }
  if (family == "path") { need(1, 1); return path(count(0)); }
  if (family == "spider") { need(2, 2); return spider(count(0), count(1)); }
  if (family == "er") { need(2, 3); return erdos_renyi(count(0), real(1), seed(2)); }
  if (family == "ws") { need(3, 4); return watts_strogatz(count(0), count(1), real(2), seed(3)); }
  throw ParameterError("unknown graph family '" + family + "'");
}

}  // namespace sis
