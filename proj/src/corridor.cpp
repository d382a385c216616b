// Copyright 2026 The Maneuver Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mplan/corridor.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <map>
#include <set>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

constexpr double kEps = 1e-9;

bool covers(const Section & sec, double s) { return sec.s_start <= s + kEps && s < sec.s_end - kEps; }

}  // namespace

double section_overlap(const Section & a, const Section & b)
{
  return std::min(a.s_end, b.s_end) - std::max(a.s_start, b.s_start);
}

double min_drivable_width(double band_width, double vehicle_width, double d_safe)
{
  return std::max(3.0 * band_width, vehicle_width + 2.0 * d_safe);
}

std::optional<std::pair<double, double>> Corridor::bounds_at(double s) const
{
  if (d_lower.empty() || s < s0 - kEps || s >= s_end()) {
    return std::nullopt;
  }
  const double x = std::max(0.0, (s - s0) / step);
  const auto i = std::min(static_cast<std::size_t>(x), d_lower.size() - 1);
  if (i + 1 >= d_lower.size()) {
    return std::make_pair(d_lower[i], d_upper[i]);
  }
  const double t = x - static_cast<double>(i);
  return std::make_pair(
    d_lower[i] + t * (d_lower[i + 1] - d_lower[i]), d_upper[i] + t * (d_upper[i + 1] - d_upper[i]));
}

std::vector<Band> make_bands(const Road & road, int bands_per_lane)
{
  if (bands_per_lane <= 0) {
    throw PlanningError("bands_per_lane must be positive");
  }
  std::vector<Band> bands;
  int index = 0;
  // Lanes are stored right to left; bands are numbered left to right.
  for (auto it = road.lanes.rbegin(); it != road.lanes.rend(); ++it) {
    const double w = it->width / bands_per_lane;
    for (int b = 0; b < bands_per_lane; ++b) {
      Band band;
      band.index = index++;
      band.lane_id = it->id;
      band.d_upper = it->d_left() - b * w;
      band.d_lower = band.d_upper - w;
      band.upper_on_lane_line = b == 0;
      band.lower_on_lane_line = b == bands_per_lane - 1;
      if (band.lower_on_lane_line) {
        band.d_lower = it->d_right();
      }
      bands.push_back(band);
    }
  }
  return bands;
}

std::vector<Section> split_into_sections(
  const Road & road, const CostMap & cost_map, std::span<const Band> bands, double s_begin,
  double s_end, const CorridorConfig & config)
{
  const double step = config.sample_step;
  s_begin = std::max(0.0, s_begin);
  s_end = std::min(s_end, road.reference.length());
  const int samples = s_end > s_begin ? static_cast<int>(std::ceil((s_end - s_begin) / step - kEps)) : 0;

  // Lateral probe offsets per band: both edges (pulled inside) plus interior
  // points spaced at most half a cell apart.
  const double probe_step = 0.5 * cost_map.resolution();
  std::vector<std::vector<double>> probes(bands.size());
  for (std::size_t j = 0; j < bands.size(); ++j) {
    const double w = bands[j].width();
    const int n = std::max(1, static_cast<int>(std::ceil(w / probe_step)));
    for (int q = 0; q <= n; ++q) {
      double d = bands[j].d_lower + w * q / n;
      d = std::clamp(d, bands[j].d_lower + 1e-6, bands[j].d_upper - 1e-6);
      probes[j].push_back(d);
    }
  }

  // Rows spanned by non-free cells per map column; lets samples whose probe
  // segment sees only free cells skip the per-probe lookups.
  const int rows = cost_map.rows();
  const int cols = cost_map.cols();
  std::vector<int> col_min(static_cast<std::size_t>(cols), rows);
  std::vector<int> col_max(static_cast<std::size_t>(cols), -1);
  const auto cells = cost_map.cells();
  for (int r = 0; r < rows; ++r) {
    const std::uint8_t * row = cells.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    for (int c = 0; c < cols; ++c) {
      if (row[c] != kFreeCell) {
        const auto ci = static_cast<std::size_t>(c);
        col_min[ci] = std::min(col_min[ci], r);
        col_max[ci] = r;
      }
    }
  }
  const double d_lo = bands.empty() ? 0.0 : bands.back().d_lower;
  const double d_hi = bands.empty() ? 0.0 : bands.front().d_upper;
  auto segment_free = [&](const Vec2 & a, const Vec2 & b) {
    const double res = cost_map.resolution();
    const Vec2 & o = cost_map.origin();
    const int c0 = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - o.x) / res)));
    const int c1 = std::min(cols - 1, static_cast<int>(std::floor((std::max(a.x, b.x) - o.x) / res)));
    const int r0 = static_cast<int>(std::floor((std::min(a.y, b.y) - o.y) / res));
    const int r1 = static_cast<int>(std::floor((std::max(a.y, b.y) - o.y) / res));
    for (int c = c0; c <= c1; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      if (col_max[ci] >= r0 && col_min[ci] <= r1) {
        return false;
      }
    }
    return true;
  };

  std::vector<std::vector<char>> blocked(bands.size(), std::vector<char>(static_cast<std::size_t>(samples), 0));
  for (int m = 0; m < samples; ++m) {
    const double s = std::min(s_begin + (m + 0.5) * step, road.reference.length());
    const Vec2 foot = road.reference.to_cartesian(s, 0.0);
    const Vec2 nrm = road.reference.normal_at(s);
    if (segment_free(foot + nrm * d_lo, foot + nrm * d_hi)) {
      continue;
    }
    for (std::size_t j = 0; j < bands.size(); ++j) {
      for (double d : probes[j]) {
        if (cost_map.cost_at(foot + nrm * d) != kFreeCell) {
          blocked[j][static_cast<std::size_t>(m)] = 1;
          break;
        }
      }
    }
  }

  std::vector<Section> out;
  for (std::size_t j = 0; j < bands.size(); ++j) {
    int k = 0;
    int m = 0;
    while (m < samples && k < config.max_sections_per_band) {
      while (m < samples && blocked[j][static_cast<std::size_t>(m)]) {
        ++m;
      }
      if (m >= samples) {
        break;
      }
      const int start = m;
      while (m < samples && !blocked[j][static_cast<std::size_t>(m)]) {
        ++m;
      }
      Section sec;
      sec.id = static_cast<int>(out.size());
      sec.lane_id = bands[j].lane_id;
      sec.band = bands[j].index;
      sec.index = k++;
      sec.s_start = s_begin + start * step;
      sec.s_end = std::min(s_end, s_begin + m * step);
      sec.d_lower = bands[j].d_lower;
      sec.d_upper = bands[j].d_upper;
      out.push_back(sec);
    }
  }
  return out;
}

SectionGraph connect_section_graph(
  std::vector<Band> bands, std::vector<Section> sections, double ego_s, double ego_d,
  const CorridorConfig & config)
{
  SectionGraph g;
  std::sort(sections.begin(), sections.end(), [](const Section & a, const Section & b) {
    return a.band != b.band ? a.band < b.band : a.index < b.index;
  });
  for (std::size_t i = 0; i < sections.size(); ++i) {
    sections[i].id = static_cast<int>(i);
  }
  g.bands = std::move(bands);
  g.sections = std::move(sections);
  g.adjacency.assign(g.sections.size(), {});

  for (std::size_t a = 0; a < g.sections.size(); ++a) {
    for (std::size_t b = a + 1; b < g.sections.size(); ++b) {
      const auto & sa = g.sections[a];
      const auto & sb = g.sections[b];
      if (std::abs(sa.band - sb.band) != 1) {
        continue;
      }
      if (section_overlap(sa, sb) >= config.vehicle_width - kEps) {
        g.adjacency[a].push_back(static_cast<int>(b));
        g.adjacency[b].push_back(static_cast<int>(a));
      }
    }
  }
  for (auto & adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());  // ids are already ordered by (band, index)
  }

  for (const auto & sec : g.sections) {
    const bool in_band = ego_d >= sec.d_lower - kEps && ego_d < sec.d_upper;
    if (in_band && sec.s_start <= ego_s + config.sample_step + kEps && ego_s < sec.s_end) {
      g.root = sec.id;
      break;
    }
  }
  if (g.root < 0) {
    throw PlanningError("root section not found");
  }
  return g;
}

EndSections generate_end_sections(const SectionGraph & graph)
{
  EndSections out;
  const std::size_t n = graph.sections.size();
  out.parent.assign(n, -1);
  std::vector<char> claimed(n, 0);
  claimed[static_cast<std::size_t>(graph.root)] = 1;
  std::vector<int> frontier{graph.root};

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> next;
    for (int cur : frontier) {
      std::vector<int> fresh;
      for (int nb : graph.adjacency[static_cast<std::size_t>(cur)]) {
        if (!claimed[static_cast<std::size_t>(nb)]) {
          claimed[static_cast<std::size_t>(nb)] = 1;
          out.parent[static_cast<std::size_t>(nb)] = cur;
          fresh.push_back(nb);
        }
      }
      if (fresh.empty()) {
        next.push_back(cur);
      } else {
        next.insert(next.end(), fresh.begin(), fresh.end());
        changed = true;
      }
    }
    frontier = std::move(next);
    if (changed) {
      ++out.rounds;
    }
  }
  if (std::find(frontier.begin(), frontier.end(), graph.root) == frontier.end()) {
    frontier.push_back(graph.root);
  }
  out.terminals = std::move(frontier);
  return out;
}

namespace
{

struct CoverageRun
{
  int lo_band;  // leftmost band (smallest index)
  int hi_band;
};

}  // namespace

std::vector<Corridor> generate_corridors(
  const SectionGraph & graph, const EndSections & ends, const Road & road, double s_begin,
  double s_end, const CorridorConfig & config)
{
  const auto & secs = graph.sections;
  auto parent_of = [&](int id) { return ends.parent[static_cast<std::size_t>(id)]; };

  // Replace stub terminals by their parents.
  std::vector<int> terminals;
  for (int t : ends.terminals) {
    int p = parent_of(t);
    if (p >= 0 && secs[static_cast<std::size_t>(t)].length() <
                    config.prune_ratio * secs[static_cast<std::size_t>(p)].length()) {
      t = p;
    }
    if (std::find(terminals.begin(), terminals.end(), t) == terminals.end()) {
      terminals.push_back(t);
    }
  }

  std::vector<std::vector<int>> chains;
  for (int t : terminals) {
    std::vector<int> chain;
    for (int c = t; c >= 0; c = parent_of(c)) {
      chain.push_back(c);
    }
    std::reverse(chain.begin(), chain.end());
    chains.push_back(std::move(chain));
  }

  double min_band = std::numeric_limits<double>::infinity();
  for (const auto & b : graph.bands) {
    min_band = std::min(min_band, b.width());
  }
  const double w_d = min_drivable_width(min_band, config.vehicle_width, config.d_safe);
  const double step = config.sample_step;
  const int samples =
    s_end > s_begin ? static_cast<int>(std::ceil((s_end - s_begin) / step - kEps)) : 0;

  std::vector<Corridor> out;
  for (std::size_t ci = 0; ci < chains.size(); ++ci) {
    Corridor cor;
    for (int id : chains[ci]) {
      cor.chain.push_back(secs[static_cast<std::size_t>(id)]);
    }
    std::set<int> lanes;
    for (const auto & s : cor.chain) {
      lanes.insert(s.lane_id);
    }
    cor.involved_lanes.assign(lanes.begin(), lanes.end());

    // Complement missing bands of the involved lanes from other corridors.
    std::map<int, std::vector<const Section *>> by_band;
    for (const auto & s : cor.chain) {
      by_band[s.band].push_back(&s);
    }
    std::vector<Section> borrowed;
    borrowed.reserve(secs.size());
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto & band : graph.bands) {
        if (!lanes.count(band.lane_id) || by_band.count(band.index)) {
          continue;
        }
        const Section * best = nullptr;
        double best_overlap = 0.0;
        for (std::size_t cj = 0; cj < chains.size(); ++cj) {
          if (cj == ci) {
            continue;
          }
          for (int id : chains[cj]) {
            const Section & cand = secs[static_cast<std::size_t>(id)];
            if (cand.band != band.index) {
              continue;
            }
            for (int nb_band : {band.index - 1, band.index + 1}) {
              auto it = by_band.find(nb_band);
              if (it == by_band.end()) {
                continue;
              }
              for (const Section * nb : it->second) {
                const double ov = section_overlap(cand, *nb);
                if (ov > best_overlap + kEps) {
                  best_overlap = ov;
                  best = &cand;
                }
              }
            }
          }
        }
        if (best != nullptr) {
          borrowed.push_back(*best);
          changed = true;
        }
      }
      if (changed) {
        by_band.clear();
        for (const auto & s : cor.chain) {
          by_band[s.band].push_back(&s);
        }
        for (const auto & s : borrowed) {
          by_band[s.band].push_back(&s);
        }
      }
    }
    cor.complements = borrowed;

    // Trim a protruding terminal to its parent.
    if (cor.chain.size() >= 2) {
      auto & term = cor.chain.back();
      const auto & par = cor.chain[cor.chain.size() - 2];
      term.s_start = std::max(term.s_start, par.s_start);
      term.s_end = std::min(term.s_end, par.s_end);
    }

    // Sample lateral bounds.
    const int nb = static_cast<int>(graph.bands.size());
    std::vector<int> owner(static_cast<std::size_t>(nb));  // -1 none, -2 complement, else chain idx
    cor.s0 = s_begin;
    cor.step = step;
    std::vector<double> raw_lo;
    std::vector<double> raw_hi;
    std::vector<CoverageRun> runs;
    for (int m = 0; m < samples; ++m) {
      const double s = s_begin + m * step;
      std::fill(owner.begin(), owner.end(), -1);
      for (std::size_t i = 0; i < cor.chain.size(); ++i) {
        if (covers(cor.chain[i], s)) {
          owner[static_cast<std::size_t>(cor.chain[i].band)] = static_cast<int>(i);
        }
      }
      for (const auto & c : cor.complements) {
        auto & o = owner[static_cast<std::size_t>(c.band)];
        if (o == -1 && covers(c, s)) {
          o = -2;
        }
      }
      runs.clear();
      for (int j = 0; j < nb; ++j) {
        if (owner[static_cast<std::size_t>(j)] == -1) {
          continue;
        }
        if (!runs.empty() && runs.back().hi_band == j - 1) {
          runs.back().hi_band = j;
        } else {
          runs.push_back({j, j});
        }
      }
      if (runs.empty()) {
        break;
      }
      int best_chain = -1;
      int best_band = -1;
      for (int j = 0; j < nb; ++j) {
        if (owner[static_cast<std::size_t>(j)] > best_chain) {
          best_chain = owner[static_cast<std::size_t>(j)];
          best_band = j;
        }
      }
      const CoverageRun * pick = nullptr;
      if (best_band >= 0) {
        for (const auto & r : runs) {
          if (r.lo_band <= best_band && best_band <= r.hi_band) {
            pick = &r;
          }
        }
      } else {
        for (const auto & r : runs) {
          if (pick == nullptr || r.hi_band - r.lo_band > pick->hi_band - pick->lo_band) {
            pick = &r;
          }
        }
      }
      const Band & left = graph.bands[static_cast<std::size_t>(pick->lo_band)];
      const Band & right = graph.bands[static_cast<std::size_t>(pick->hi_band)];
      double hi = left.d_upper;
      double lo = right.d_lower;
      if (left.upper_on_lane_line) {
        hi -= config.d_safe;
      }
      if (right.lower_on_lane_line) {
        lo += config.d_safe;
      }
      raw_lo.push_back(lo);
      raw_hi.push_back(hi);
    }

    // Moving-average smoothing, never widening the raw bounds.
    const int n = static_cast<int>(raw_lo.size());
    const int half = std::max(0, config.smoothing_window / 2);
    cor.d_lower.resize(static_cast<std::size_t>(n));
    cor.d_upper.resize(static_cast<std::size_t>(n));
    std::vector<double> sum_lo(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> sum_hi(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      sum_lo[u + 1] = sum_lo[u] + raw_lo[u];
      sum_hi[u + 1] = sum_hi[u] + raw_hi[u];
    }
    for (int i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(std::max(0, i - half));
      const auto b = static_cast<std::size_t>(std::min(n - 1, i + half)) + 1;
      const double cnt = static_cast<double>(b - a);
      const auto u = static_cast<std::size_t>(i);
      cor.d_lower[u] = std::max(raw_lo[u], (sum_lo[b] - sum_lo[a]) / cnt);
      cor.d_upper[u] = std::min(raw_hi[u], (sum_hi[b] - sum_hi[a]) / cnt);
    }
    int eff = n;
    for (int i = 0; i < n; ++i) {
      if (cor.d_upper[static_cast<std::size_t>(i)] - cor.d_lower[static_cast<std::size_t>(i)] < w_d - kEps) {
        eff = i;
        break;
      }
    }
    cor.d_lower.resize(static_cast<std::size_t>(eff));
    cor.d_upper.resize(static_cast<std::size_t>(eff));
    cor.effective_length = eff * step;
    cor.blocked = eff < samples;
    if (eff == 0) {
      continue;
    }

    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Corridor & o) {
      if (o.involved_lanes != cor.involved_lanes || o.d_lower.size() != cor.d_lower.size()) {
        return false;
      }
      for (std::size_t i = 0; i < o.d_lower.size(); ++i) {
        if (std::abs(o.d_lower[i] - cor.d_lower[i]) > kEps ||
            std::abs(o.d_upper[i] - cor.d_upper[i]) > kEps) {
          return false;
        }
      }
      return true;
    });
    if (!duplicate) {
      out.push_back(std::move(cor));
    }
  }
  (void)road;
  return out;
}

StaticTopology build_static_topology(
  const Road & road, const CostMap & cost_map, double ego_s, double ego_d, double horizon,
  const CorridorConfig & config)
{
  StaticTopology topo;
  auto bands = make_bands(road, config.bands_per_lane);
  const double s_end = std::min(road.reference.length(), ego_s + horizon);
  auto sections = split_into_sections(road, cost_map, bands, ego_s, s_end, config);
  topo.graph = connect_section_graph(std::move(bands), std::move(sections), ego_s, ego_d, config);
  topo.ends = generate_end_sections(topo.graph);
  topo.corridors = generate_corridors(topo.graph, topo.ends, road, ego_s, s_end, config);
  return topo;
}

}  // namespace mplan
