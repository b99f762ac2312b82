#ifndef LIDAUS_SPACE_HPP
#define LIDAUS_SPACE_HPP

#include <string>
#include <utility>
#include <vector>

#include "lidaus/geometry.hpp"
#include "lidaus/signal_model.hpp"

namespace lidaus {

struct SpaceSpec {
    double width = 0.0;   // x extent, m
    double depth = 0.0;   // y extent, m
    double height = 0.0;  // z extent, m
    std::vector<double> layer_heights;
    double cell_side = 0.0;
    std::vector<Box> obstacles;
    // Grid columns (ix, iy) where the vehicle may move between layers.
    // Defaults to the origin column when left empty.
    std::vector<std::pair<int, int>> transition_columns;

    void validate() const;  // throws std::invalid_argument with a reason
};

enum class BeaconKind { target, anchor };

struct Beacon {
    std::string id;
    BeaconKind kind = BeaconKind::target;
    Vec3 true_position;
    PathLossParams params;
};

struct GridEdge {
    int u = 0;  // node ids, u < v
    int v = 0;
    double length = 0.0;
    bool vertical = false;
    int layer = 0;  // layer of u (== layer of v for horizontal edges)
};

// Identifies one cell of the 3D discretization: a grid cell (cx, cy) between
// layers gap and gap+1. Single-layer spaces use gap == 0 and the cell
// degenerates to a square on that layer.
struct CubeId {
    int cx = 0;
    int cy = 0;
    int gap = 0;

    bool operator==(const CubeId& o) const { return cx == o.cx && cy == o.cy && gap == o.gap; }
};

struct ProjectedNode {
    int node = 0;
    bool clamped = false;
};

// The discretized space: one grid graph per horizontal layer plus vertical
// transition edges at designated columns. Immutable after construction.
class MultiLayerGridGraph {
public:
    static MultiLayerGridGraph discretize(const SpaceSpec& spec);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int num_layers() const { return static_cast<int>(layer_heights_.size()); }
    int nodes_per_layer() const { return nx_ * ny_; }
    int num_nodes() const { return nodes_per_layer() * num_layers(); }
    double cell_side() const { return cell_side_; }
    const std::vector<double>& layer_heights() const { return layer_heights_; }
    const SpaceSpec& spec() const { return spec_; }

    int node_id(int ix, int iy, int layer) const {
        return layer * nodes_per_layer() + ix * ny_ + iy;
    }
    int node_ix(int id) const { return (id % nodes_per_layer()) / ny_; }
    int node_iy(int id) const { return id % ny_; }
    int node_layer(int id) const { return id / nodes_per_layer(); }
    Vec3 node_position(int id) const {
        return {node_ix(id) * cell_side_, node_iy(id) * cell_side_,
                layer_heights_[static_cast<std::size_t>(node_layer(id))]};
    }

    const std::vector<GridEdge>& edges() const { return edges_; }
    int total_edge_count() const { return static_cast<int>(edges_.size()); }
    // Indices into edges() for the horizontal edges of one layer.
    const std::vector<int>& layer_edges(int layer) const {
        return layer_edges_[static_cast<std::size_t>(layer)];
    }
    // Neighbor node ids in ascending order (ascending id == lexicographic
    // (x, y) within a layer, then upper layers).
    const std::vector<int>& neighbors(int node) const {
        return adjacency_[static_cast<std::size_t>(node)];
    }
    std::vector<int> layer_neighbors(int node) const;
    int degree_in_layer(int node) const;

    // -1 when the node pair is not an edge.
    int edge_index(int u, int v) const;

    // Nearest edge to p by point-segment distance; ties resolved by the
    // smaller edge index (edges are sorted by endpoint ids).
    int nearest_edge(const Vec3& p) const;

    // Ground-layer node minimizing planar distance to p; ties break toward
    // the lexicographically smallest (x, y). Out-of-bounds points clamp to
    // the boundary and are flagged.
    ProjectedNode project_to_ground(const Vec3& p) const;

    // Minimal-hop path between two nodes on the same layer, deterministic
    // under lexicographic neighbor expansion. Returns (node path, length).
    std::pair<std::vector<int>, double> shortest_path(int u, int v) const;

    CubeId cube_of_point(const Vec3& p) const;
    // Corner node ids of a cube: 4 on each bounding layer (4 total for
    // single-layer spaces), ascending id order.
    std::vector<int> cube_corner_nodes(const CubeId& cube) const;

private:
    SpaceSpec spec_;
    int nx_ = 0;
    int ny_ = 0;
    double cell_side_ = 0.0;
    std::vector<double> layer_heights_;
    std::vector<GridEdge> edges_;
    std::vector<std::vector<int>> layer_edges_;
    std::vector<std::vector<int>> adjacency_;
};

}  // namespace lidaus

#endif
