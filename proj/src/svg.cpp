#include "lod2rec/svg.hpp"

#include <fstream>

namespace lod2rec {

namespace {

struct SvgCanvas {
    std::ofstream out;
    Rect box;
    double scale;

    SvgCanvas(const std::string& path, Rect b) : out(path), box(b) {
        scale = 800.0 / std::max(box.width(), box.height());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
            << box.width() * scale << "\" height=\"" << box.height() * scale << "\">\n";
    }
    ~SvgCanvas() { out << "</svg>\n"; }

    double X(double x) const { return (x - box.lo.x) * scale; }
    double Y(double y) const { return (box.hi.y - y) * scale; }

    void poly(const std::vector<Point2>& ring, const std::string& fill,
              const std::string& stroke) {
        out << "<polygon points=\"";
        for (const auto& p : ring) out << X(p.x) << "," << Y(p.y) << " ";
        out << "\" fill=\"" << fill << "\" stroke=\"" << stroke
            << "\" stroke-width=\"1\" fill-opacity=\"0.6\"/>\n";
    }
    void line(Point2 a, Point2 b, const std::string& stroke, double width) {
        out << "<line x1=\"" << X(a.x) << "\" y1=\"" << Y(a.y) << "\" x2=\"" << X(b.x)
            << "\" y2=\"" << Y(b.y) << "\" stroke=\"" << stroke << "\" stroke-width=\""
            << width << "\"/>\n";
    }
};

std::string label_color(int label) {
    if (label <= 0) return "#dddddd";
    static const char* palette[] = {"#e6794a", "#4a90e6", "#50b86c", "#c94ae6",
                                    "#e6c84a", "#4ae6d8", "#e64a6b", "#8c6d3f"};
    return palette[static_cast<std::size_t>(label - 1) % 8];
}

} // namespace

void write_partition_svg(const Partition2D& partition, const std::string& path) {
    SvgCanvas canvas(path, partition.bbox);
    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        std::vector<Point2> ring;
        for (auto v : partition.cells[c].outer) ring.push_back(partition.vertices[v]);
        canvas.poly(ring, label_color(partition.cells[c].label), "#333333");
    }
    for (const auto& e : partition.edges) {
        canvas.line(partition.vertices[e.a], partition.vertices[e.b],
                    e.on_footprint ? "#000000" : "#666666", e.on_footprint ? 2.0 : 1.0);
    }
}

void write_regularity_svg(const Partition2D& before, const Partition2D& after,
                          const RegularityGraph& graph, const std::vector<int>* edge_map,
                          const std::string& path) {
    SvgCanvas canvas(path, before.bbox);
    for (const auto& e : before.edges)
        canvas.line(before.vertices[e.a], before.vertices[e.b], "#bbbbbb", 1.0);
    for (const auto& e : after.edges)
        canvas.line(after.vertices[e.a], after.vertices[e.b], "#222222", 1.5);
    auto midpoint = [&](std::size_t graph_edge) {
        int mapped = edge_map ? (*edge_map)[graph_edge] : static_cast<int>(graph_edge);
        if (mapped < 0) return Point2{0, 0};
        const auto& e = after.edges[static_cast<std::size_t>(mapped)];
        return (after.vertices[e.a] + after.vertices[e.b]) * 0.5;
    };
    for (const auto& l : graph.links) {
        Point2 ma = midpoint(l.edge_a), mb = midpoint(l.edge_b);
        canvas.line(ma, mb, l.relation == Relation::parallel ? "#2faa2f" : "#8a2fb0", 0.8);
    }
}

} // namespace lod2rec
