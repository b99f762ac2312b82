#ifndef LIDAUS_PLANNING_HPP
#define LIDAUS_PLANNING_HPP

#include <set>
#include <utility>
#include <vector>

#include "lidaus/space.hpp"

namespace lidaus {

// A node sequence where consecutive nodes are graph-adjacent (grid edge or
// vertical transition). Closed walks start and end at the same node.
struct Walk {
    std::vector<int> nodes;
    double total_length = 0.0;
    int segment_count = 1;
};

struct MatchingResult {
    std::vector<std::pair<int, int>> pairs;  // indices into the input node set
    double cost = 0.0;
    bool exact = true;
    double lower_bound = 0.0;  // only meaningful for heuristic solutions
};

// Minimum-cost perfect matching on a complete graph given as a symmetric
// weight matrix. Exact subset-DP up to 12 nodes; greedy plus pairwise
// exchange above that, with a reported lower bound.
MatchingResult min_cost_perfect_matching(const std::vector<std::vector<double>>& weights);

// Closed walk from origin covering every edge of the origin's layer at
// least once: odd nodes are paired by a minimum-cost matching over
// shortest-path distances, matched paths are duplicated, and an Euler tour
// of the resulting even multigraph is extracted (Hierholzer, lexicographic
// neighbor order).
Walk eulerian_explore_path(const MultiLayerGridGraph& g, int origin_node,
                           MatchingResult* matching_info = nullptr);

// Concatenates one closed tour per layer, bottom to top, with a vertical
// ascent after each tour and a final descent back to the ground origin.
// Produces 2 * num_layers logical segments.
Walk stitch_layers(const MultiLayerGridGraph& g, const std::vector<Walk>& layer_walks);

struct SteinerTree {
    std::vector<int> nodes;                   // ascending
    std::vector<std::pair<int, int>> edges;   // (u, v) with u < v, ascending
    int root = 0;
    std::vector<int> terminals;
    double total_cost = 0.0;
};

// Metric-closure 2-approximation: MST over shortest-path distances among
// root and terminals, expanded into graph paths, cycles dropped, and
// non-terminal leaves pruned. Deterministic tie-breaking throughout.
SteinerTree steiner_tree(const MultiLayerGridGraph& g, const std::vector<int>& terminals,
                         int root);

// Minimum-length root-to-leaf path of the tree; ties resolved toward the
// lexicographically smallest leaf.
Walk shortest_branch(const SteinerTree& tree, const MultiLayerGridGraph& g);

struct AnchorSchedule {
    std::vector<int> nodes;  // walk order
    double spacing = 0.0;
};

// Deployment positions every `spacing` meters of walked distance, snapped
// to walk nodes, skipping nodes that already hold an anchor.
AnchorSchedule plan_anchor_schedule(const Walk& walk, const MultiLayerGridGraph& g,
                                    double spacing, const std::set<int>& already_deployed);

// Axis-aligned waypoint loop flown when the vehicle reaches a target's
// ground projection: rise to the estimated height, trace a square of the
// given side length around the estimate, return and descend. Returned as
// waypoints in continuous coordinates.
std::vector<Vec3> target_detour_waypoints(const Vec3& ground_point, const Vec3& estimate,
                                          double loop_side);

}  // namespace lidaus

#endif
