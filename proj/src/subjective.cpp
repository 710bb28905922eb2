#include "based/subjective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "based/csv.hpp"
#include "based/errors.hpp"

namespace based {

namespace {

struct Problem {
  std::vector<std::string> names;
  std::vector<double> wins;                   // W_i, ties counted half
  std::vector<std::vector<double>> games;     // n_ij
  std::vector<std::vector<double>> beat;      // share of i's wins over j, ties counted half
};

Problem build_problem(std::span<const PairwiseTally> tallies) {
  std::map<std::string, std::size_t> index;
  for (const auto& t : tallies) {
    if (t.a == t.b) throw DataError("method '" + t.a + "' is compared with itself");
    if (t.wins_a < 0 || t.wins_b < 0 || t.ties < 0) {
      throw DataError("negative count in tally " + t.a + " vs " + t.b);
    }
    index.emplace(t.a, 0);
    index.emplace(t.b, 0);
  }
  Problem p;
  for (auto& [name, i] : index) {
    i = p.names.size();
    p.names.push_back(name);
  }
  const std::size_t m = p.names.size();
  p.wins.assign(m, 0.0);
  p.games.assign(m, std::vector<double>(m, 0.0));
  p.beat.assign(m, std::vector<double>(m, 0.0));
  for (const auto& t : tallies) {
    const std::size_t a = index[t.a];
    const std::size_t b = index[t.b];
    const double n = static_cast<double>(t.wins_a + t.wins_b + t.ties);
    const double half_ties = 0.5 * static_cast<double>(t.ties);
    p.games[a][b] += n;
    p.games[b][a] += n;
    p.beat[a][b] += static_cast<double>(t.wins_a) + half_ties;
    p.beat[b][a] += static_cast<double>(t.wins_b) + half_ties;
    p.wins[a] += static_cast<double>(t.wins_a) + half_ties;
    p.wins[b] += static_cast<double>(t.wins_b) + half_ties;
  }
  return p;
}

std::string join_names(const std::vector<std::string>& names, const std::vector<std::size_t>& ids) {
  std::string out = "{";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ", ";
    out += names[ids[k]];
  }
  return out + "}";
}

// Strongly connected components of the "i beat j" graph, Kosaraju.
std::vector<int> components(const std::vector<std::vector<double>>& adj, bool transpose_graph) {
  const std::size_t m = adj.size();
  auto edge = [&](std::size_t i, std::size_t j) {
    return transpose_graph ? adj[j][i] > 0.0 : adj[i][j] > 0.0;
  };
  std::vector<char> seen(m, 0);
  std::vector<std::size_t> order;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    seen[i] = 1;
    for (std::size_t j = 0; j < m; ++j) {
      if (!seen[j] && edge(i, j)) visit(j);
    }
    order.push_back(i);
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (!seen[i]) visit(i);
  }
  std::vector<int> comp(m, -1);
  int next = 0;
  std::function<void(std::size_t, int)> assign = [&](std::size_t i, int c) {
    comp[i] = c;
    for (std::size_t j = 0; j < m; ++j) {
      if (comp[j] < 0 && edge(j, i)) assign(j, c);
    }
  };
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] < 0) assign(*it, next++);
  }
  return comp;
}

void check_identifiable(const Problem& p) {
  const std::size_t m = p.names.size();

  // Undirected connectivity over pairs that met at least once.
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = root(parent[i]);
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (p.games[i][j] > 0.0) parent[root(i)] = root(j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m; ++i) groups[root(i)].push_back(i);
  if (groups.size() > 1) {
    std::string msg = "comparison graph is disconnected:";
    for (const auto& [r, ids] : groups) msg += " " + join_names(p.names, ids);
    throw DegenerateError(msg);
  }

  std::vector<std::size_t> losers;
  for (std::size_t i = 0; i < m; ++i) {
    if (p.wins[i] == 0.0) losers.push_back(i);
  }
  if (!losers.empty()) {
    throw DegenerateError("methods lose every comparison: " + join_names(p.names, losers));
  }

  const auto comp = components(p.beat, false);
  const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  if (n_comp > 1) {
    // A component nobody outside ever beat has an unbounded ability.
    std::vector<char> beaten(n_comp, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (comp[i] != comp[j] && p.beat[i][j] > 0.0) beaten[comp[j]] = 1;
      }
    }
    std::vector<std::size_t> unbeaten;
    for (std::size_t i = 0; i < m; ++i) {
      if (!beaten[comp[i]]) unbeaten.push_back(i);
    }
    throw DegenerateError("methods never lose to the remaining ones: " +
                          join_names(p.names, unbeaten));
  }
}

double loglik_from_log_abilities(const Problem& p, const std::vector<double>& log_p) {
  // log P(i beats j) = -log(1 + exp(s_j - s_i)), accumulated in extended
  // precision so the per-sweep trace is not dominated by summation noise.
  auto log_win = [](long double si, long double sj) {
    const long double d = sj - si;
    return d > 0.0L ? -(d + std::log1p(std::exp(-d))) : -std::log1p(std::exp(d));
  };
  long double ll = 0.0L;
  const std::size_t m = p.names.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && p.beat[i][j] > 0.0) ll += static_cast<long double>(p.beat[i][j]) * log_win(log_p[i], log_p[j]);
    }
  }
  return static_cast<double>(ll);
}

}  // namespace

BtScores bt_fit(std::span<const PairwiseTally> tallies, const BtOptions& options) {
  const Problem p = build_problem(tallies);
  const std::size_t m = p.names.size();
  if (m == 0) return {};
  if (m == 1) return {{p.names.front(), 0.0}};
  check_identifiable(p);

  std::vector<double> ability(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m);
  bool converged = false;
  for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
    for (std::size_t i = 0; i < m; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i && p.games[i][j] > 0.0) denom += p.games[i][j] / (ability[i] + ability[j]);
      }
      next[i] = p.wins[i] / denom;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] /= total;
      delta = std::max(delta, std::abs(std::log(next[i]) - std::log(ability[i])));
    }
    ability.swap(next);
    if (options.on_sweep) {
      std::vector<double> log_p(m);
      for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(ability[i]);
      options.on_sweep(sweep, loglik_from_log_abilities(p, log_p));
    }
    if (delta < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("Bradley-Terry fit did not converge in " +
                           std::to_string(options.max_iter) + " sweeps");
  }

  std::vector<double> log_p(m);
  for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(ability[i]);
  const double floor = *std::min_element(log_p.begin(), log_p.end());
  BtScores scores;
  for (std::size_t i = 0; i < m; ++i) scores[p.names[i]] = log_p[i] - floor;
  return scores;
}

double bt_loglik(std::span<const PairwiseTally> tallies, const BtScores& scores) {
  const Problem p = build_problem(tallies);
  std::vector<double> log_p(p.names.size());
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    auto it = scores.find(p.names[i]);
    if (it == scores.end()) throw DataError("no score for method '" + p.names[i] + "'");
    log_p[i] = it->second;
  }
  return loglik_from_log_abilities(p, log_p);
}

std::vector<PairwiseTally> read_pairs_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require_header(table, {"a", "b", "wins_a", "wins_b", "ties"}, path.string());
  std::vector<PairwiseTally> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto count = [&](std::size_t col) -> std::int64_t {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(row[col], &used);
        if (used != row[col].size()) throw std::invalid_argument("trailing characters");
        return v;
      } catch (const std::exception&) {
        throw ValidationError(path.string() + " row " + std::to_string(table.line_numbers[r]) +
                              ": column '" + table.header[col] + "' is not an integer");
      }
    };
    out.push_back({row[0], row[1], count(2), count(3), count(4)});
  }
  return out;
}

std::vector<std::pair<std::string, double>> ranked(const BtScores& scores) {
  std::vector<std::pair<std::string, double>> out(scores.begin(), scores.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

void write_scores_csv(const std::filesystem::path& path, const BtScores& scores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "method,score\n";
  for (const auto& [name, score] : ranked(scores)) {
    out << csv_field(name) << ',' << format_double(score) << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace based
