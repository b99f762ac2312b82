#include "lidaus/space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace lidaus {

namespace {

bool is_multiple(double value, double unit) {
    const double q = value / unit;
    return std::abs(q - std::round(q)) < 1e-9;
}

}  // namespace

void SpaceSpec::validate() const {
    if (cell_side <= 0.0) throw std::invalid_argument("space: cell_side must be > 0");
    if (width < cell_side || depth < cell_side)
        throw std::invalid_argument("space: width and depth must be at least one cell");
    if (!is_multiple(width, cell_side) || !is_multiple(depth, cell_side))
        throw std::invalid_argument("space: width and depth must be integer multiples of cell_side");
    if (layer_heights.empty()) throw std::invalid_argument("space: at least one layer required");
    for (std::size_t i = 0; i < layer_heights.size(); ++i) {
        if (layer_heights[i] < 0.0 || layer_heights[i] > height)
            throw std::invalid_argument("space: layer heights must lie in [0, height]");
        if (i > 0 && layer_heights[i] <= layer_heights[i - 1])
            throw std::invalid_argument("space: layer heights must be strictly increasing");
    }
    for (const auto& box : obstacles)
        if (!box.valid()) throw std::invalid_argument("space: obstacle box has min > max");
}

MultiLayerGridGraph MultiLayerGridGraph::discretize(const SpaceSpec& spec) {
    spec.validate();

    MultiLayerGridGraph g;
    g.spec_ = spec;
    g.cell_side_ = spec.cell_side;
    g.layer_heights_ = spec.layer_heights;
    g.nx_ = static_cast<int>(std::round(spec.width / spec.cell_side)) + 1;
    g.ny_ = static_cast<int>(std::round(spec.depth / spec.cell_side)) + 1;

    const int layers = g.num_layers();
    const int per_layer = g.nodes_per_layer();

    auto blocked = [&](const Vec3& a, const Vec3& b) {
        for (const auto& box : spec.obstacles)
            if (segment_intersects_box(a, b, box)) return true;
        return false;
    };

    // Horizontal edges: +y neighbor then +x neighbor per node keeps the edge
    // list sorted by (u, v) after the final sort.
    for (int layer = 0; layer < layers; ++layer) {
        for (int ix = 0; ix < g.nx_; ++ix) {
            for (int iy = 0; iy < g.ny_; ++iy) {
                const int u = g.node_id(ix, iy, layer);
                const Vec3 pu = g.node_position(u);
                if (iy + 1 < g.ny_) {
                    const int v = g.node_id(ix, iy + 1, layer);
                    if (!blocked(pu, g.node_position(v)))
                        g.edges_.push_back({u, v, spec.cell_side, false, layer});
                }
                if (ix + 1 < g.nx_) {
                    const int v = g.node_id(ix + 1, iy, layer);
                    if (!blocked(pu, g.node_position(v)))
                        g.edges_.push_back({u, v, spec.cell_side, false, layer});
                }
            }
        }
    }

    // Vertical transitions between consecutive layers.
    std::vector<std::pair<int, int>> columns = spec.transition_columns;
    if (columns.empty()) columns.push_back({0, 0});
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    for (const auto& [ix, iy] : columns) {
        if (ix < 0 || ix >= g.nx_ || iy < 0 || iy >= g.ny_)
            throw std::invalid_argument("space: transition column outside the grid");
        for (int layer = 0; layer + 1 < layers; ++layer) {
            const int u = g.node_id(ix, iy, layer);
            const int v = g.node_id(ix, iy, layer + 1);
            const Vec3 pu = g.node_position(u);
            const Vec3 pv = g.node_position(v);
            if (!blocked(pu, pv))
                g.edges_.push_back({u, v, pv.z - pu.z, true, layer});
        }
    }

    std::sort(g.edges_.begin(), g.edges_.end(), [](const GridEdge& a, const GridEdge& b) {
        return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });

    g.adjacency_.assign(static_cast<std::size_t>(g.num_nodes()), {});
    g.layer_edges_.assign(static_cast<std::size_t>(layers), {});
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        const GridEdge& e = g.edges_[i];
        g.adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
        g.adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
        if (!e.vertical) g.layer_edges_[static_cast<std::size_t>(e.layer)].push_back(static_cast<int>(i));
    }
    for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());

    // Each layer must stay connected over its non-isolated nodes; nodes
    // swallowed by an obstacle are allowed to go isolated.
    for (int layer = 0; layer < layers; ++layer) {
        if (g.layer_edges_[static_cast<std::size_t>(layer)].empty())
            throw std::runtime_error("space: layer " + std::to_string(layer) + " has no traversable edges");
        std::vector<char> seen(static_cast<std::size_t>(g.num_nodes()), 0);
        int start = -1;
        int active = 0;
        for (int n = layer * per_layer; n < (layer + 1) * per_layer; ++n) {
            if (g.degree_in_layer(n) > 0) {
                ++active;
                if (start < 0) start = n;
            }
        }
        std::deque<int> queue{start};
        seen[static_cast<std::size_t>(start)] = 1;
        int reached = 0;
        while (!queue.empty()) {
            const int n = queue.front();
            queue.pop_front();
            ++reached;
            for (int m : g.layer_neighbors(n)) {
                if (!seen[static_cast<std::size_t>(m)]) {
                    seen[static_cast<std::size_t>(m)] = 1;
                    queue.push_back(m);
                }
            }
        }
        if (reached != active)
            throw std::runtime_error("space: layer " + std::to_string(layer) +
                                     " is disconnected after obstacle removal");
    }
    return g;
}

std::vector<int> MultiLayerGridGraph::layer_neighbors(int node) const {
    const int layer = node_layer(node);
    std::vector<int> out;
    for (int m : neighbors(node))
        if (node_layer(m) == layer) out.push_back(m);
    return out;
}

int MultiLayerGridGraph::degree_in_layer(int node) const {
    const int layer = node_layer(node);
    int deg = 0;
    for (int m : neighbors(node))
        if (node_layer(m) == layer) ++deg;
    return deg;
}

int MultiLayerGridGraph::edge_index(int u, int v) const {
    if (u > v) std::swap(u, v);
    const GridEdge key{u, v, 0.0, false, 0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                               [](const GridEdge& a, const GridEdge& b) {
                                   return std::pair(a.u, a.v) < std::pair(b.u, b.v);
                               });
    if (it == edges_.end() || it->u != u || it->v != v) return -1;
    return static_cast<int>(it - edges_.begin());
}

int MultiLayerGridGraph::nearest_edge(const Vec3& p) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const double d = point_segment_distance(p, node_position(edges_[i].u),
                                                node_position(edges_[i].v));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

ProjectedNode MultiLayerGridGraph::project_to_ground(const Vec3& p) const {
    const bool clamped = p.x < 0.0 || p.x > spec_.width || p.y < 0.0 || p.y > spec_.depth ||
                         p.z < 0.0 || p.z > spec_.height;
    // ceil(x - 0.5) keeps exact midpoints on the smaller index.
    auto snap = [this](double coord, int count) {
        int i = static_cast<int>(std::ceil(coord / cell_side_ - 0.5));
        return std::max(0, std::min(count - 1, i));
    };
    const int ix = snap(p.x, nx_);
    const int iy = snap(p.y, ny_);
    return {node_id(ix, iy, 0), clamped};
}

std::pair<std::vector<int>, double> MultiLayerGridGraph::shortest_path(int u, int v) const {
    if (node_layer(u) != node_layer(v))
        throw std::invalid_argument("shortest_path: nodes must be on the same layer");
    std::vector<int> parent(static_cast<std::size_t>(num_nodes()), -1);
    std::deque<int> queue{u};
    parent[static_cast<std::size_t>(u)] = u;
    while (!queue.empty() && parent[static_cast<std::size_t>(v)] < 0) {
        const int n = queue.front();
        queue.pop_front();
        for (int m : layer_neighbors(n)) {
            if (parent[static_cast<std::size_t>(m)] < 0) {
                parent[static_cast<std::size_t>(m)] = n;
                queue.push_back(m);
            }
        }
    }
    if (parent[static_cast<std::size_t>(v)] < 0)
        throw std::runtime_error("shortest_path: nodes are not connected");

    std::vector<int> path{v};
    while (path.back() != u) path.push_back(parent[static_cast<std::size_t>(path.back())]);
    std::reverse(path.begin(), path.end());
    return {path, static_cast<double>(path.size() - 1) * cell_side_};
}

CubeId MultiLayerGridGraph::cube_of_point(const Vec3& p) const {
    // Lower cell wins on shared faces so cube choice is deterministic.
    auto cell = [this](double coord, int cells) {
        int c = static_cast<int>(std::ceil(coord / cell_side_)) - 1;
        return std::max(0, std::min(cells - 1, c));
    };
    CubeId cube;
    cube.cx = cell(p.x, nx_ - 1);
    cube.cy = cell(p.y, ny_ - 1);
    cube.gap = 0;
    if (num_layers() > 1) {
        int gap = 0;
        for (std::size_t k = 0; k < layer_heights_.size(); ++k)
            if (layer_heights_[k] < p.z) gap = static_cast<int>(k);
        cube.gap = std::min(gap, num_layers() - 2);
    }
    return cube;
}

std::vector<int> MultiLayerGridGraph::cube_corner_nodes(const CubeId& cube) const {
    std::vector<int> corners;
    const int top = num_layers() > 1 ? cube.gap + 1 : cube.gap;
    for (int layer = cube.gap; layer <= top; ++layer)
        for (int ix = cube.cx; ix <= cube.cx + 1; ++ix)
            for (int iy = cube.cy; iy <= cube.cy + 1; ++iy)
                corners.push_back(node_id(ix, iy, layer));
    std::sort(corners.begin(), corners.end());
    return corners;
}

}  // namespace lidaus
