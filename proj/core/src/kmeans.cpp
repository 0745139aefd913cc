#include <limits>
#include <numeric>

#include "aircomp/policies.hpp"

namespace aircomp {

namespace {

double sq_dist(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Nearest centroid; ties go to the lowest index.
std::size_t nearest(const Position& p, const std::vector<Position>& centroids) {
  std::size_t best = 0;
  double best_d = sq_dist(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

double wcss(const std::vector<Position>& points, const std::vector<Position>& centroids,
            const std::vector<std::size_t>& assignment) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) sum += sq_dist(points[i], centroids[assignment[i]]);
  return sum;
}

KMeansResult kmeans_run(const std::vector<Position>& points, std::size_t k, std::uint32_t iters,
                        Rng& rng) {
  const std::size_t n = points.size();
  if (n == 0) throw DegenerateInput("k-means needs at least one point");
  if (k == 0) throw DegenerateInput("k-means needs k >= 1");
  if (k > n) throw DegenerateInput("k-means: k exceeds the number of points");

  KMeansResult r;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  r.centroids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(order[i], order[j]);
    r.centroids.push_back(points[order[i]]);
  }

  r.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.assignment[i] = nearest(points[i], r.centroids);
  r.wcss_history.push_back(wcss(points, r.centroids, r.assignment));

  std::vector<std::size_t> sizes(k);
  std::vector<Position> sums(k);
  for (std::uint32_t it = 0; it < iters; ++it) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (auto c : r.assignment) ++sizes[c];

    // Re-seed empty clusters with the point farthest from its centroid. A
    // donor cluster always has >= 2 members because k <= n.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[r.assignment[i]] < 2) continue;
        const double d = sq_dist(points[i], r.centroids[r.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[r.assignment[far]];
      r.assignment[far] = c;
      sizes[c] = 1;
      r.centroids[c] = points[far];
    }

    std::fill(sums.begin(), sums.end(), Position{});
    for (std::size_t i = 0; i < n; ++i) {
      sums[r.assignment[i]].x += points[i].x;
      sums[r.assignment[i]].y += points[i].y;
    }
    for (std::size_t c = 0; c < k; ++c) {
      r.centroids[c] = {sums[c].x / static_cast<double>(sizes[c]),
                        sums[c].y / static_cast<double>(sizes[c])};
    }

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest(points[i], r.centroids);
      if (c != r.assignment[i]) {
        r.assignment[i] = c;
        changed = true;
      }
    }
    r.wcss_history.push_back(wcss(points, r.centroids, r.assignment));
    r.iterations = it + 1;
    if (!changed) break;
  }
  return r;
}

std::vector<Position> kmeans(const std::vector<Position>& points, std::size_t k,
                             std::uint32_t iters, Rng& rng) {
  return kmeans_run(points, k, iters, rng).centroids;
}

}  // namespace aircomp
