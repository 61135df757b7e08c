#include <algorithm>
#include <limits>
#include <variant>

#include "mollified/errors.hpp"
#include "mollified/geometry.hpp"

namespace mollified {

namespace {

struct Circle {
  Point center;
  double radius;
  bool domain_inside;
};

struct AxisBox {
  Point lo, hi;
};

struct Polyline {
  std::vector<Point> vertices;
};

struct Line {
  HalfPlane h;
};

enum class Combine { intersection, unite, complement };

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

} // namespace

struct SignedDistance::Node {
  struct Composite {
    Combine op;
    std::shared_ptr<const Node> a, b;
  };
  std::variant<Circle, AxisBox, Polyline, Line, Composite> shape;

  double eval(Point p) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Circle>) {
            const double d = distance(p, s.center) - s.radius;
            return s.domain_inside ? -d : d;
          } else if constexpr (std::is_same_v<T, AxisBox>) {
            const Point c = 0.5 * (s.lo + s.hi);
            const Point half = 0.5 * (s.hi - s.lo);
            const double qx = std::abs(p.x - c.x) - half.x;
            const double qy = std::abs(p.y - c.y) - half.y;
            const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
            const double inside = std::min(std::max(qx, qy), 0.0);
            return -(outside + inside);
          } else if constexpr (std::is_same_v<T, Polyline>) {
            const auto& v = s.vertices;
            double d = std::numeric_limits<double>::infinity();
            bool in = false;
            for (std::size_t i = 0, n = v.size(), j = n - 1; i < n; j = i++) {
              d = std::min(d, segment_distance(p, v[j], v[i]));
              if ((v[i].y > p.y) != (v[j].y > p.y) &&
                  p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
                in = !in;
            }
            return in ? d : -d;
          } else if constexpr (std::is_same_v<T, Line>) {
            return -s.h.signed_excess(p);
          } else {
            switch (s.op) {
            case Combine::intersection: return std::min(s.a->eval(p), s.b->eval(p));
            case Combine::unite: return std::max(s.a->eval(p), s.b->eval(p));
            case Combine::complement: return -s.a->eval(p);
            }
            return 0.0;
          }
        },
        shape);
  }

  void corners(std::vector<Point>& out) const {
    if (const auto* b = std::get_if<AxisBox>(&shape)) {
      out.insert(out.end(), {b->lo, {b->hi.x, b->lo.y}, b->hi, {b->lo.x, b->hi.y}});
    } else if (const auto* l = std::get_if<Polyline>(&shape)) {
      out.insert(out.end(), l->vertices.begin(), l->vertices.end());
    } else if (const auto* c = std::get_if<Composite>(&shape)) {
      if (c->a) c->a->corners(out);
      if (c->b) c->b->corners(out);
    }
  }
};

SignedDistance SignedDistance::circle(Point center, double radius, bool domain_inside) {
  if (!(radius > 0.0)) throw InvalidArgument("circle radius must be positive");
  return SignedDistance(std::make_shared<const Node>(Node{Circle{center, radius, domain_inside}}));
}

SignedDistance SignedDistance::box(Point lo, Point hi) {
  if (!(hi.x > lo.x && hi.y > lo.y)) throw InvalidArgument("box must have positive extent");
  return SignedDistance(std::make_shared<const Node>(Node{AxisBox{lo, hi}}));
}

SignedDistance SignedDistance::polygon(std::vector<Point> boundary) {
  if (boundary.size() < 3) throw InvalidArgument("polygon boundary needs at least three vertices");
  return SignedDistance(std::make_shared<const Node>(Node{Polyline{std::move(boundary)}}));
}

SignedDistance SignedDistance::half_plane(Point normal, double offset) {
  return SignedDistance(std::make_shared<const Node>(Node{Line{HalfPlane::make(normal, offset)}}));
}

SignedDistance SignedDistance::intersection(const SignedDistance& a, const SignedDistance& b) {
  return SignedDistance(std::make_shared<const Node>(Node{Node::Composite{Combine::intersection, a.node_, b.node_}}));
}

SignedDistance SignedDistance::unite(const SignedDistance& a, const SignedDistance& b) {
  return SignedDistance(std::make_shared<const Node>(Node{Node::Composite{Combine::unite, a.node_, b.node_}}));
}

SignedDistance SignedDistance::complement(const SignedDistance& a) {
  return SignedDistance(std::make_shared<const Node>(Node{Node::Composite{Combine::complement, a.node_, nullptr}}));
}

double SignedDistance::operator()(Point p) const { return node_->eval(p); }

std::vector<Point> SignedDistance::corners() const {
  std::vector<Point> out;
  node_->corners(out);
  std::erase_if(out, [&](Point p) { return std::abs(node_->eval(p)) > kGeomEps * (1.0 + norm(p)); });
  return out;
}

} // namespace mollified
