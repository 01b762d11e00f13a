#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wtw {

using Weight = std::int64_t;

/// Undirected link with i < j.
struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    Weight w = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    std::size_t node = 0;
    Weight weight = 0;
};

/// Undirected simple graph with positive integer link weights.
///
/// Immutable once built. Pairs that are absent have weight zero; the binary
/// projection is a_ij = 1 iff w_ij > 0. `unit()` records the quantization
/// unit used at ingestion so that weight * unit recovers the original scale.
class WeightedGraph {
public:
    WeightedGraph() = default;

    /// Duplicate pairs are summed and zero weights dropped. Throws InputError on
    /// self-loops, negative weights or node indices out of range.
    WeightedGraph(std::vector<std::string> labels, std::span<const Edge> edges, double unit = 1.0);

    /// Nodes labelled "0".."n-1".
    static WeightedGraph with_nodes(std::size_t n, std::span<const Edge> edges = {});

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::optional<std::size_t> index_of(std::string_view label) const;

    Weight weight(std::size_t i, std::size_t j) const;
    bool adjacent(std::size_t i, std::size_t j) const { return weight(i, j) > 0; }
    std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }

    /// Links sorted by (i, j), i < j.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t num_links() const noexcept { return edges_.size(); }
    Weight total_weight() const noexcept { return total_weight_; }
    double unit() const noexcept { return unit_; }

    /// Same topology with every weight set to 1.
    WeightedGraph binarized() const;

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    Weight total_weight_ = 0;
    double unit_ = 1.0;
};

struct EdgeRow {
    std::string src;
    std::string dst;
    double weight = 0.0;
};

struct LoadOptions {
    /// Quantization unit u > 0; weights are stored as round-half-up(weight / u).
    double unit = 1.0;
    /// Nodes to include even if they appear in no row.
    std::vector<std::string> extra_nodes;
};

/// Node order: first appearance in the rows, then unseen extra nodes.
WeightedGraph graph_from_rows(std::span<const EdgeRow> rows, const LoadOptions& options = {});

/// Reads a `src,dst,weight` CSV. Errors carry the offending line number.
WeightedGraph load_graph(std::istream& csv, const LoadOptions& options = {});
WeightedGraph load_graph(const std::filesystem::path& path, const LoadOptions& options = {});

void write_edge_list(std::ostream& out, const WeightedGraph& g);

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance (haversine, mean Earth radius) in km.
double haversine_km(GeoPoint a, GeoPoint b);

/// Exogenous per-node quantities aligned with a graph's node indices.
class NodeAttributes {
public:
    NodeAttributes() = default;

    /// `distances`, when given, is a row-major n x n symmetric matrix and takes
    /// precedence over `positions`.
    explicit NodeAttributes(std::vector<double> fitness,
                            std::optional<std::vector<GeoPoint>> positions = std::nullopt,
                            std::optional<std::vector<double>> distances = std::nullopt);

    std::size_t size() const noexcept { return fitness_.size(); }
    double fitness(std::size_t i) const { return fitness_.at(i); }
    std::span<const double> fitness() const noexcept { return fitness_; }

    bool has_positions() const noexcept { return positions_.has_value(); }
    const std::optional<std::vector<GeoPoint>>& positions() const noexcept { return positions_; }

    bool has_distances() const noexcept { return !distances_.empty(); }
    /// Throws InputError when neither positions nor a distance matrix were given.
    double distance(std::size_t i, std::size_t j) const;

    /// Same attributes with fitness multiplied by `factor`.
    NodeAttributes scaled_fitness(double factor) const;

private:
    std::vector<double> fitness_;
    std::optional<std::vector<GeoPoint>> positions_;
    std::vector<double> distances_;
};

/// Rows of a `node,fitness[,lat,lon]` CSV, in file order.
struct AttributeTable {
    std::vector<std::string> nodes;
    std::vector<double> fitness;
    std::optional<std::vector<GeoPoint>> positions;
};

AttributeTable load_attribute_table(std::istream& csv);
AttributeTable load_attribute_table(const std::filesystem::path& path);
void write_attribute_table(std::ostream& out, const AttributeTable& table);

/// Square matrix CSV with node labels as first row and first column.
struct DistanceTable {
    std::vector<std::string> nodes;
    std::vector<double> values;  // row-major
};

DistanceTable load_distance_table(std::istream& csv);
DistanceTable load_distance_table(const std::filesystem::path& path);

/// Reorders tables to the graph's node indices. Every graph node must be present.
NodeAttributes align_attributes(const WeightedGraph& g, const AttributeTable& attrs,
                                const DistanceTable* distances = nullptr);

} // namespace wtw
