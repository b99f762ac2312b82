#include "lidaus/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace lidaus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatchingResult matching_exact(const std::vector<std::vector<double>>& w) {
    const int n = static_cast<int>(w.size());
    const int full = (1 << n) - 1;
    std::vector<double> best(static_cast<std::size_t>(full) + 1, kInf);
    std::vector<std::pair<int, int>> choice(static_cast<std::size_t>(full) + 1, {-1, -1});
    best[0] = 0.0;

    for (int mask = 1; mask <= full; ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 != 0) continue;
        int i = __builtin_ctz(static_cast<unsigned>(mask));
        for (int j = i + 1; j < n; ++j) {
            if (!(mask & (1 << j))) continue;
            const int rest = mask ^ (1 << i) ^ (1 << j);
            if (best[static_cast<std::size_t>(rest)] == kInf) continue;
            const double cand = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                                best[static_cast<std::size_t>(rest)];
            if (cand < best[static_cast<std::size_t>(mask)]) {
                best[static_cast<std::size_t>(mask)] = cand;
                choice[static_cast<std::size_t>(mask)] = {i, j};
            }
        }
    }

    MatchingResult out;
    out.exact = true;
    out.cost = best[static_cast<std::size_t>(full)];
    int mask = full;
    while (mask) {
        const auto [i, j] = choice[static_cast<std::size_t>(mask)];
        out.pairs.push_back({i, j});
        mask ^= (1 << i) | (1 << j);
    }
    std::reverse(out.pairs.begin(), out.pairs.end());
    out.lower_bound = out.cost;
    return out;
}

MatchingResult matching_heuristic(const std::vector<std::vector<double>>& w) {
    const int n = static_cast<int>(w.size());
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    MatchingResult out;
    out.exact = false;

    // Greedy: cheapest available pair first.
    for (int picked = 0; picked < n / 2; ++picked) {
        double best = kInf;
        std::pair<int, int> arg{-1, -1};
        for (int i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double c = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (c < best) {
                    best = c;
                    arg = {i, j};
                }
            }
        }
        used[static_cast<std::size_t>(arg.first)] = 1;
        used[static_cast<std::size_t>(arg.second)] = 1;
        out.pairs.push_back(arg);
    }

    // Pairwise exchange until stable.
    auto cost_of = [&](int a, int b) {
        return w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };
    bool improved = true;
    int guard = 0;
    while (improved && guard++ < 1000) {
        improved = false;
        for (std::size_t p = 0; p < out.pairs.size(); ++p) {
            for (std::size_t q = p + 1; q < out.pairs.size(); ++q) {
                auto& [a, b] = out.pairs[p];
                auto& [c, d] = out.pairs[q];
                const double cur = cost_of(a, b) + cost_of(c, d);
                const double swap1 = cost_of(a, c) + cost_of(b, d);
                const double swap2 = cost_of(a, d) + cost_of(b, c);
                if (swap1 < cur - 1e-12 && swap1 <= swap2) {
                    std::swap(b, c);
                    improved = true;
                } else if (swap2 < cur - 1e-12) {
                    std::swap(b, d);
                    improved = true;
                }
            }
        }
    }

    out.cost = 0.0;
    for (const auto& [a, b] : out.pairs) out.cost += cost_of(a, b);
    double lb = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = kInf;
        for (int j = 0; j < n; ++j)
            if (j != i) m = std::min(m, cost_of(i, j));
        lb += m;
    }
    out.lower_bound = lb / 2.0;
    return out;
}

std::string node_name(const MultiLayerGridGraph& g, int node) {
    const Vec3 p = g.node_position(node);
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
}

}  // namespace

MatchingResult min_cost_perfect_matching(const std::vector<std::vector<double>>& weights) {
    const std::size_t n = weights.size();
    if (n % 2 != 0) throw std::invalid_argument("matching: node count must be even");
    if (n == 0) return {};
    for (const auto& row : weights)
        if (row.size() != n) throw std::invalid_argument("matching: weight matrix must be square");
    return n <= 12 ? matching_exact(weights) : matching_heuristic(weights);
}

Walk eulerian_explore_path(const MultiLayerGridGraph& g, int origin_node,
                           MatchingResult* matching_info) {
    const int layer = g.node_layer(origin_node);
    if (g.degree_in_layer(origin_node) == 0)
        throw std::invalid_argument("explore path: origin node has no traversable edges");

    // Odd-degree nodes of the layer.
    const int base = layer * g.nodes_per_layer();
    std::vector<int> odd;
    for (int node = base; node < base + g.nodes_per_layer(); ++node)
        if (g.degree_in_layer(node) % 2 == 1) odd.push_back(node);

    // Edge multiplicities: every layer edge once, matched paths duplicated.
    std::map<std::pair<int, int>, int> multiplicity;
    double total_length = 0.0;
    for (int ei : g.layer_edges(layer)) {
        const GridEdge& e = g.edges()[static_cast<std::size_t>(ei)];
        multiplicity[{e.u, e.v}] = 1;
        total_length += e.length;
    }

    MatchingResult matching;
    if (!odd.empty()) {
        std::vector<std::vector<double>> w(odd.size(), std::vector<double>(odd.size(), 0.0));
        for (std::size_t i = 0; i < odd.size(); ++i)
            for (std::size_t j = i + 1; j < odd.size(); ++j)
                w[i][j] = w[j][i] = g.shortest_path(odd[i], odd[j]).second;
        matching = min_cost_perfect_matching(w);
        for (const auto& [i, j] : matching.pairs) {
            const auto [path, len] = g.shortest_path(odd[static_cast<std::size_t>(i)],
                                                     odd[static_cast<std::size_t>(j)]);
            for (std::size_t k = 0; k + 1 < path.size(); ++k) {
                const int u = std::min(path[k], path[k + 1]);
                const int v = std::max(path[k], path[k + 1]);
                ++multiplicity[{u, v}];
            }
            total_length += len;
        }
    }
    if (matching_info) *matching_info = matching;

    // Hierholzer over the even multigraph, lexicographic neighbor order.
    std::map<int, std::multiset<int>> adj;
    for (const auto& [edge, count] : multiplicity)
        for (int c = 0; c < count; ++c) {
            adj[edge.first].insert(edge.second);
            adj[edge.second].insert(edge.first);
        }

    std::vector<int> stack{origin_node};
    std::vector<int> circuit;
    while (!stack.empty()) {
        const int v = stack.back();
        auto& nbrs = adj[v];
        if (nbrs.empty()) {
            circuit.push_back(v);
            stack.pop_back();
        } else {
            const int u = *nbrs.begin();
            nbrs.erase(nbrs.begin());
            auto& back = adj[u];
            back.erase(back.find(v));
            stack.push_back(u);
        }
    }
    std::reverse(circuit.begin(), circuit.end());

    Walk walk;
    walk.nodes = std::move(circuit);
    walk.total_length = total_length;
    walk.segment_count = 1;
    return walk;
}

Walk stitch_layers(const MultiLayerGridGraph& g, const std::vector<Walk>& layer_walks) {
    const int layers = g.num_layers();
    if (static_cast<int>(layer_walks.size()) != layers)
        throw std::invalid_argument("stitch: need exactly one walk per layer");
    for (const auto& w : layer_walks)
        if (w.nodes.empty() || w.nodes.front() != w.nodes.back())
            throw std::invalid_argument("stitch: layer walks must be closed");

    Walk out;
    out.nodes = layer_walks[0].nodes;
    out.total_length = layer_walks[0].total_length;

    for (int layer = 1; layer < layers; ++layer) {
        const int below = out.nodes.back();
        const int above = g.node_id(g.node_ix(below), g.node_iy(below), layer);
        const int ei = g.edge_index(below, above);
        if (ei < 0)
            throw std::runtime_error("stitch: no vertical transition at " + node_name(g, below));
        if (layer_walks[static_cast<std::size_t>(layer)].nodes.front() != above)
            throw std::invalid_argument("stitch: layer walk does not start above the previous tour end");
        out.nodes.push_back(above);
        out.total_length += g.edges()[static_cast<std::size_t>(ei)].length;
        const auto& nodes = layer_walks[static_cast<std::size_t>(layer)].nodes;
        out.nodes.insert(out.nodes.end(), nodes.begin() + 1, nodes.end());
        out.total_length += layer_walks[static_cast<std::size_t>(layer)].total_length;
    }

    // Final descent to the ground origin column.
    for (int layer = layers - 2; layer >= 0; --layer) {
        const int cur = out.nodes.back();
        const int below = g.node_id(g.node_ix(cur), g.node_iy(cur), layer);
        const int ei = g.edge_index(cur, below);
        if (ei < 0)
            throw std::runtime_error("stitch: no vertical transition at " + node_name(g, cur));
        out.nodes.push_back(below);
        out.total_length += g.edges()[static_cast<std::size_t>(ei)].length;
    }

    out.segment_count = 2 * layers;
    return out;
}

SteinerTree steiner_tree(const MultiLayerGridGraph& g, const std::vector<int>& terminals,
                         int root) {
    if (terminals.empty()) throw std::invalid_argument("steiner: no terminals");
    const int layer = g.node_layer(root);

    std::vector<int> targets{root};
    for (int t : terminals) {
        if (g.node_layer(t) != layer)
            throw std::invalid_argument("steiner: terminal " + node_name(g, t) +
                                        " not on the root's layer");
        if (t != root && std::find(targets.begin(), targets.end(), t) == targets.end())
            targets.push_back(t);
    }

    // BFS from every target, recording hop distance and parent links.
    const std::size_t num_nodes = static_cast<std::size_t>(g.num_nodes());
    std::vector<std::vector<int>> dist(targets.size()), parent(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        dist[i].assign(num_nodes, -1);
        parent[i].assign(num_nodes, -1);
        std::vector<int> queue{targets[i]};
        dist[i][static_cast<std::size_t>(targets[i])] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int n = queue[head];
            for (int m : g.layer_neighbors(n)) {
                if (dist[i][static_cast<std::size_t>(m)] < 0) {
                    dist[i][static_cast<std::size_t>(m)] = dist[i][static_cast<std::size_t>(n)] + 1;
                    parent[i][static_cast<std::size_t>(m)] = n;
                    queue.push_back(m);
                }
            }
        }
    }
    for (std::size_t i = 1; i < targets.size(); ++i)
        if (dist[0][static_cast<std::size_t>(targets[i])] < 0)
            throw std::runtime_error("steiner: terminal " + node_name(g, targets[i]) +
                                     " unreachable from the root");

    // Prim over the metric closure, root first.
    std::vector<char> in_tree(targets.size(), 0);
    in_tree[0] = 1;
    std::set<std::pair<int, int>> edge_set;
    for (std::size_t added = 1; added < targets.size(); ++added) {
        double best = kInf;
        std::size_t best_from = 0, best_to = 0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!in_tree[i]) continue;
            for (std::size_t j = 0; j < targets.size(); ++j) {
                if (in_tree[j]) continue;
                const double d = dist[i][static_cast<std::size_t>(targets[j])];
                if (d < best) {
                    best = d;
                    best_from = i;
                    best_to = j;
                }
            }
        }
        in_tree[best_to] = 1;
        // Expand the closure edge into the BFS path from best_from.
        int cur = targets[best_to];
        while (cur != targets[best_from]) {
            const int prev = parent[best_from][static_cast<std::size_t>(cur)];
            edge_set.insert({std::min(cur, prev), std::max(cur, prev)});
            cur = prev;
        }
    }

    // The expanded union can contain cycles; keep a BFS spanning tree from
    // the root, then prune non-terminal leaves.
    std::map<int, std::vector<int>> adj;
    for (const auto& [u, v] : edge_set) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& [node, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    std::map<int, int> tree_parent;
    tree_parent[root] = root;
    std::vector<int> queue{root};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (int m : adj[queue[head]]) {
            if (!tree_parent.count(m)) {
                tree_parent[m] = queue[head];
                queue.push_back(m);
            }
        }
    }

    std::set<int> keep;
    for (const auto& [node, par] : tree_parent) keep.insert(node);
    std::map<int, int> degree;
    std::set<std::pair<int, int>> tree_edges;
    for (const auto& [node, par] : tree_parent) {
        if (node == root) continue;
        tree_edges.insert({std::min(node, par), std::max(node, par)});
        ++degree[node];
        ++degree[par];
    }
    const std::set<int> required(targets.begin(), targets.end());
    bool pruned = true;
    while (pruned) {
        pruned = false;
        for (auto it = keep.begin(); it != keep.end();) {
            const int node = *it;
            if (node != root && degree[node] == 1 && !required.count(node)) {
                const int par = tree_parent[node];
                tree_edges.erase({std::min(node, par), std::max(node, par)});
                --degree[par];
                it = keep.erase(it);
                pruned = true;
            } else {
                ++it;
            }
        }
    }

    SteinerTree tree;
    tree.root = root;
    tree.terminals = std::vector<int>(targets.begin() + 1, targets.end());
    tree.nodes = std::vector<int>(keep.begin(), keep.end());
    tree.edges = std::vector<std::pair<int, int>>(tree_edges.begin(), tree_edges.end());
    for (const auto& [u, v] : tree.edges) {
        const int ei = g.edge_index(u, v);
        tree.total_cost += g.edges()[static_cast<std::size_t>(ei)].length;
    }
    return tree;
}

Walk shortest_branch(const SteinerTree& tree, const MultiLayerGridGraph& g) {
    if (tree.edges.empty()) return {{tree.root}, 0.0, 1};

    std::map<int, std::vector<int>> adj;
    for (const auto& [u, v] : tree.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& [node, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    // Root-to-node path lengths by DFS; the tree is small.
    std::map<int, int> parent;
    std::map<int, double> length;
    parent[tree.root] = tree.root;
    length[tree.root] = 0.0;
    std::vector<int> stack{tree.root};
    while (!stack.empty()) {
        const int n = stack.back();
        stack.pop_back();
        for (int m : adj[n]) {
            if (parent.count(m)) continue;
            parent[m] = n;
            const int ei = g.edge_index(n, m);
            length[m] = length[n] + g.edges()[static_cast<std::size_t>(ei)].length;
            stack.push_back(m);
        }
    }

    int best_leaf = -1;
    for (const auto& [node, nbrs] : adj) {
        if (node == tree.root || nbrs.size() != 1) continue;
        if (best_leaf < 0 || length[node] < length[best_leaf] ||
            (length[node] == length[best_leaf] && node < best_leaf))
            best_leaf = node;
    }

    Walk branch;
    branch.total_length = length[best_leaf];
    for (int cur = best_leaf; cur != tree.root; cur = parent[cur]) branch.nodes.push_back(cur);
    branch.nodes.push_back(tree.root);
    std::reverse(branch.nodes.begin(), branch.nodes.end());
    return branch;
}

AnchorSchedule plan_anchor_schedule(const Walk& walk, const MultiLayerGridGraph& g,
                                    double spacing, const std::set<int>& already_deployed) {
    if (spacing <= 0.0) throw std::invalid_argument("anchor schedule: spacing must be > 0");

    AnchorSchedule schedule;
    schedule.spacing = spacing;
    std::set<int> taken = already_deployed;

    double cum = 0.0;
    double next = 0.0;
    for (std::size_t i = 0; i < walk.nodes.size(); ++i) {
        if (i > 0) {
            const int ei = g.edge_index(walk.nodes[i - 1], walk.nodes[i]);
            if (ei < 0) throw std::invalid_argument("anchor schedule: walk is not edge-connected");
            cum += g.edges()[static_cast<std::size_t>(ei)].length;
        }
        if (cum + 1e-9 >= next) {
            const int node = walk.nodes[i];
            if (!taken.count(node)) {
                schedule.nodes.push_back(node);
                taken.insert(node);
            }
            next = spacing * (std::floor(cum / spacing + 1e-9) + 1.0);
        }
    }
    return schedule;
}

std::vector<Vec3> target_detour_waypoints(const Vec3& ground_point, const Vec3& estimate,
                                          double loop_side) {
    const double h = loop_side / 2.0;
    const double ez = estimate.z;
    const double x0 = estimate.x - h, x1 = estimate.x + h;
    const double y0 = estimate.y - h, y1 = estimate.y + h;

    std::vector<Vec3> raw{
        {ground_point.x, ground_point.y, ez},  // ascend
        {x0, ground_point.y, ez},
        {x0, y0, ez},
        {x1, y0, ez},
        {x1, y1, ez},
        {x0, y1, ez},
        {x0, y0, ez},
        {x0, ground_point.y, ez},
        {ground_point.x, ground_point.y, ez},
        ground_point,  // descend
    };
    std::vector<Vec3> waypoints;
    for (const Vec3& p : raw)
        if (waypoints.empty() || waypoints.back() != p) waypoints.push_back(p);
    return waypoints;
}

}  // namespace lidaus
