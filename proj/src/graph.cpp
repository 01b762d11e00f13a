#include "wtw/graph.hpp"

#include "csv.hpp"
#include "wtw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

namespace wtw {

namespace {

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return in;
}

} // namespace

WeightedGraph::WeightedGraph(std::vector<std::string> labels, std::span<const Edge> edges, double unit)
    : labels_(std::move(labels)), adjacency_(labels_.size()), unit_(unit) {
    if (!(unit > 0.0) || !std::isfinite(unit))
        throw InputError("weight unit must be positive");
    const std::size_t n = labels_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!index_.emplace(labels_[i], i).second)
            throw InputError("duplicate node label '" + labels_[i] + "'");
    }

    std::map<std::pair<std::size_t, std::size_t>, Weight> merged;
    for (const Edge& e : edges) {
        if (e.i >= n || e.j >= n)
            throw InputError("edge endpoint out of range");
        if (e.i == e.j)
            throw InputError("self-loop on node '" + labels_[e.i] + "'");
        if (e.w < 0)
            throw InputError("negative weight between '" + labels_[e.i] + "' and '" + labels_[e.j] + "'");
        if (e.w == 0)
            continue;
        merged[std::minmax(e.i, e.j)] += e.w;
    }

    edges_.reserve(merged.size());
    for (const auto& [key, w] : merged) {
        edges_.push_back({key.first, key.second, w});
        adjacency_[key.first].push_back({key.second, w});
        adjacency_[key.second].push_back({key.first, w});
        total_weight_ += w;
    }
    for (auto& nb : adjacency_)
        std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
}

WeightedGraph WeightedGraph::with_nodes(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = std::to_string(i);
    return WeightedGraph(std::move(labels), edges);
}

std::optional<std::size_t> WeightedGraph::index_of(std::string_view label) const {
    const auto it = index_.find(std::string(label));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

Weight WeightedGraph::weight(std::size_t i, std::size_t j) const {
    const auto& nb = adjacency_.at(i);
    const auto it = std::lower_bound(nb.begin(), nb.end(), j,
                                     [](const Neighbor& a, std::size_t v) { return a.node < v; });
    return (it != nb.end() && it->node == j) ? it->weight : 0;
}

WeightedGraph WeightedGraph::binarized() const {
    std::vector<Edge> binary = edges_;
    for (auto& e : binary)
        e.w = 1;
    return WeightedGraph(labels_, binary, 1.0);
}

WeightedGraph graph_from_rows(std::span<const EdgeRow> rows, const LoadOptions& options) {
    if (!(options.unit > 0.0) || !std::isfinite(options.unit))
        throw InputError("weight unit must be positive");

    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> index;
    const auto intern = [&](const std::string& label) {
        const auto [it, inserted] = index.emplace(label, labels.size());
        if (inserted)
            labels.push_back(label);
        return it->second;
    };

    std::vector<Edge> edges;
    edges.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const EdgeRow& row = rows[r];
        const std::string where = "row " + std::to_string(r + 1) + ": ";
        if (!std::isfinite(row.weight))
            throw InputError(where + "weight is not finite");
        if (row.weight < 0.0)
            throw InputError(where + "negative weight");
        if (row.src == row.dst)
            throw InputError(where + "self-loop on '" + row.src + "'");
        const double scaled = std::floor(row.weight / options.unit + 0.5);
        if (scaled >= 9.0e18)
            throw InputError(where + "quantized weight overflows");
        const std::size_t a = intern(row.src);
        const std::size_t b = intern(row.dst);
        edges.push_back({a, b, static_cast<Weight>(scaled)});
    }
    for (const auto& extra : options.extra_nodes)
        intern(extra);
    return WeightedGraph(std::move(labels), edges, options.unit);
}

WeightedGraph load_graph(std::istream& csv, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(csv, line, line_no))
        throw InputError("edge list is empty (missing header src,dst,weight)");
    const auto header = detail::split_csv(line);
    if (header.size() != 3 || header[0] != "src" || header[1] != "dst" || header[2] != "weight")
        throw InputError(at_line(line_no) + "expected header src,dst,weight");

    std::vector<EdgeRow> rows;
    std::vector<std::size_t> line_of_row;
    while (detail::next_line(csv, line, line_no)) {
        const auto cells = detail::split_csv(line);
        if (cells.size() != 3)
            throw InputError(at_line(line_no) + "expected 3 fields");
        const auto w = detail::parse_double(cells[2]);
        if (!w)
            throw InputError(at_line(line_no) + "weight '" + cells[2] + "' is not a number");
        if (*w < 0.0)
            throw InputError(at_line(line_no) + "negative weight");
        if (cells[0] == cells[1])
            throw InputError(at_line(line_no) + "self-loop on '" + cells[0] + "'");
        if (cells[0].empty() || cells[1].empty())
            throw InputError(at_line(line_no) + "empty node label");
        rows.push_back({cells[0], cells[1], *w});
        line_of_row.push_back(line_no);
    }
    try {
        return graph_from_rows(rows, options);
    } catch (const InputError& e) {
        // rewrite "row k" to the file line for the remaining row-level checks
        const std::string msg = e.what();
        if (msg.rfind("row ", 0) == 0) {
            const std::size_t r = std::stoul(msg.substr(4));
            if (r >= 1 && r <= line_of_row.size())
                throw InputError(at_line(line_of_row[r - 1]) + msg.substr(msg.find(": ") + 2));
        }
        throw;
    }
}

WeightedGraph load_graph(const std::filesystem::path& path, const LoadOptions& options) {
    auto in = open_input(path);
    return load_graph(in, options);
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
    out << "src,dst,weight\n";
    for (const Edge& e : g.edges())
        out << detail::csv_field(g.labels()[e.i]) << ',' << detail::csv_field(g.labels()[e.j]) << ',' << e.w << '\n';
}

double haversine_km(GeoPoint a, GeoPoint b) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlon = (b.lon - a.lon) * deg;
    const double s = std::sin(dlat / 2.0);
    const double t = std::sin(dlon / 2.0);
    const double h = s * s + std::cos(a.lat * deg) * std::cos(b.lat * deg) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

NodeAttributes::NodeAttributes(std::vector<double> fitness, std::optional<std::vector<GeoPoint>> positions,
                               std::optional<std::vector<double>> distances)
    : fitness_(std::move(fitness)), positions_(std::move(positions)) {
    const std::size_t n = fitness_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(fitness_[i] > 0.0) || !std::isfinite(fitness_[i]))
            throw InputError("fitness of node " + std::to_string(i) + " must be positive and finite");
    }
    if (positions_ && positions_->size() != n)
        throw InputError("positions size does not match fitness size");

    if (distances) {
        if (distances->size() != n * n)
            throw InputError("distance matrix must be n x n");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double d = (*distances)[i * n + j];
                if (!std::isfinite(d) || d < 0.0)
                    throw InputError("distances must be finite and non-negative");
                if (i == j && d != 0.0)
                    throw InputError("distance of a node to itself must be zero");
                if (d != (*distances)[j * n + i])
                    throw InputError("distance matrix must be symmetric");
            }
        }
        distances_ = std::move(*distances);
    } else if (positions_) {
        distances_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = haversine_km((*positions_)[i], (*positions_)[j]);
                distances_[i * n + j] = d;
                distances_[j * n + i] = d;
            }
        }
    }
}

double NodeAttributes::distance(std::size_t i, std::size_t j) const {
    if (distances_.empty())
        throw InputError("distances unavailable: supply positions or a distance matrix");
    const std::size_t n = size();
    if (i >= n || j >= n)
        throw InputError("node index out of range");
    return distances_[i * n + j];
}

NodeAttributes NodeAttributes::scaled_fitness(double factor) const {
    if (!(factor > 0.0))
        throw InputError("fitness scale factor must be positive");
    NodeAttributes out = *this;
    for (auto& f : out.fitness_)
        f *= factor;
    return out;
}

AttributeTable load_attribute_table(std::istream& csv) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(csv, line, line_no))
        throw InputError("attribute file is empty (missing header node,fitness)");
    const auto header = detail::split_csv(line);
    const bool with_pos = header.size() == 4;
    if (!((header.size() == 2 || with_pos) && header[0] == "node" && header[1] == "fitness" &&
          (!with_pos || (header[2] == "lat" && header[3] == "lon"))))
        throw InputError(at_line(line_no) + "expected header node,fitness[,lat,lon]");

    AttributeTable table;
    if (with_pos)
        table.positions.emplace();
    while (detail::next_line(csv, line, line_no)) {
        const auto cells = detail::split_csv(line);
        if (cells.size() != header.size())
            throw InputError(at_line(line_no) + "expected " + std::to_string(header.size()) + " fields");
        const auto f = detail::parse_double(cells[1]);
        if (!f || !(*f > 0.0))
            throw InputError(at_line(line_no) + "fitness must be a positive number");
        table.nodes.push_back(cells[0]);
        table.fitness.push_back(*f);
        if (with_pos) {
            const auto lat = detail::parse_double(cells[2]);
            const auto lon = detail::parse_double(cells[3]);
            if (!lat || !lon || std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0)
                throw InputError(at_line(line_no) + "invalid coordinates");
            table.positions->push_back({*lat, *lon});
        }
    }
    return table;
}

AttributeTable load_attribute_table(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_attribute_table(in);
}

void write_attribute_table(std::ostream& out, const AttributeTable& table) {
    out << (table.positions ? "node,fitness,lat,lon\n" : "node,fitness\n");
    for (std::size_t i = 0; i < table.nodes.size(); ++i) {
        out << detail::csv_field(table.nodes[i]) << ',' << detail::format_double(table.fitness[i]);
        if (table.positions)
            out << ',' << detail::format_double((*table.positions)[i].lat) << ','
                << detail::format_double((*table.positions)[i].lon);
        out << '\n';
    }
}

DistanceTable load_distance_table(std::istream& csv) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(csv, line, line_no))
        throw InputError("distance file is empty");
    auto header = detail::split_csv(line);
    DistanceTable table;
    table.nodes.assign(header.begin() + 1, header.end());
    const std::size_t n = table.nodes.size();
    table.values.resize(n * n);
    std::size_t row = 0;
    while (detail::next_line(csv, line, line_no)) {
        const auto cells = detail::split_csv(line);
        if (row >= n)
            throw InputError(at_line(line_no) + "more rows than columns");
        if (cells.size() != n + 1)
            throw InputError(at_line(line_no) + "expected " + std::to_string(n + 1) + " fields");
        if (cells[0] != table.nodes[row])
            throw InputError(at_line(line_no) + "row label '" + cells[0] + "' does not match column order");
        for (std::size_t j = 0; j < n; ++j) {
            const auto v = detail::parse_double(cells[j + 1]);
            if (!v)
                throw InputError(at_line(line_no) + "non-numeric distance");
            table.values[row * n + j] = *v;
        }
        ++row;
    }
    if (row != n)
        throw InputError("distance matrix has " + std::to_string(row) + " rows, expected " + std::to_string(n));
    return table;
}

DistanceTable load_distance_table(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_distance_table(in);
}

NodeAttributes align_attributes(const WeightedGraph& g, const AttributeTable& attrs, const DistanceTable* distances) {
    const std::size_t n = g.size();
    std::unordered_map<std::string, std::size_t> attr_index;
    for (std::size_t r = 0; r < attrs.nodes.size(); ++r)
        attr_index.emplace(attrs.nodes[r], r);

    std::vector<double> fitness(n);
    std::optional<std::vector<GeoPoint>> positions;
    if (attrs.positions)
        positions.emplace(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = attr_index.find(g.labels()[i]);
        if (it == attr_index.end())
            throw InputError("node '" + g.labels()[i] + "' has no attributes");
        fitness[i] = attrs.fitness[it->second];
        if (positions)
            (*positions)[i] = (*attrs.positions)[it->second];
    }

    std::optional<std::vector<double>> matrix;
    if (distances) {
        std::unordered_map<std::string, std::size_t> dist_index;
        for (std::size_t r = 0; r < distances->nodes.size(); ++r)
            dist_index.emplace(distances->nodes[r], r);
        const std::size_t m = distances->nodes.size();
        std::vector<std::size_t> map(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto it = dist_index.find(g.labels()[i]);
            if (it == dist_index.end())
                throw InputError("node '" + g.labels()[i] + "' missing from distance matrix");
            map[i] = it->second;
        }
        matrix.emplace(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                (*matrix)[i * n + j] = distances->values[map[i] * m + map[j]];
    }
    return NodeAttributes(std::move(fitness), std::move(positions), std::move(matrix));
}

} // namespace wtw
