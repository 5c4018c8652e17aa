#include "furnish/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace furnish {

namespace {

constexpr std::array<const char*, 2> kFurnitureColor{"#d62728", "#f2c500"};

const char* fill_for(ElementKind kind) {
  switch (kind) {
    case ElementKind::wall: return "#555555";
    case ElementKind::door: return "#a0522d";
    case ElementKind::window: return "#7fb3d5";
    case ElementKind::furniture: return "#999999";
  }
  return "#999999";
}

class Canvas {
 public:
  Canvas(const SceneInstance& scene, const RenderOptions& options) : scale_(options.pixels_per_meter) {
    min_x_ = scene.boundary.min_x();
    max_x_ = scene.boundary.max_x();
    min_y_ = scene.boundary.min_y();
    max_y_ = scene.boundary.max_y();
    for (const auto& e : scene.fixed) {
      min_x_ = std::min(min_x_, e.box.min_x());
      max_x_ = std::max(max_x_, e.box.max_x());
      min_y_ = std::min(min_y_, e.box.min_y());
      max_y_ = std::max(max_y_, e.box.max_y());
    }
    const double margin = 0.2;
    min_x_ -= margin;
    min_y_ -= margin;
    max_x_ += margin;
    max_y_ += margin;
  }

  double width() const { return (max_x_ - min_x_) * scale_; }
  double height() const { return (max_y_ - min_y_) * scale_; }
  double x(double meters) const { return (meters - min_x_) * scale_; }
  // Scene y grows upward, SVG y downward.
  double y(double meters) const { return (max_y_ - meters) * scale_; }

  std::string rect(const AxisBox& b, const std::string& attributes, const std::string& title = {}) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" ", x(b.min_x()),
                  y(b.max_y()), b.size_w() * scale_, b.size_h() * scale_);
    if (title.empty()) return buf + attributes + "/>\n";
    return buf + attributes + "><title>" + title + "</title></rect>\n";
  }

  std::string line(double x0, double y0, double x1, double y1, const std::string& attributes) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" ", x(x0), y(y0), x(x1),
                  y(y1));
    return buf + attributes + "/>\n";
  }

 private:
  double scale_;
  double min_x_, max_x_, min_y_, max_y_;
};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const Canvas& canvas) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.2f %.2f\">\n",
                std::ceil(canvas.width()), std::ceil(canvas.height()), canvas.width(), canvas.height());
  return buf;
}

std::string room_layer(const SceneInstance& scene, const Canvas& canvas, const RenderOptions& options) {
  std::string out = "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<g class=\"room\">\n";
  out += canvas.rect(scene.boundary, "class=\"boundary\" fill=\"#f7f3ea\" stroke=\"#333333\" stroke-width=\"1\"");
  if (options.grid) {
    out += "<g class=\"grid\" stroke=\"#b0b0b0\" stroke-width=\"0.5\" stroke-opacity=\"0.35\">\n";
    const AxisBox& b = scene.boundary;
    const double d = scene.step_size;
    const int nx = static_cast<int>(std::floor(b.size_w() / d + 1e-9));
    const int ny = static_cast<int>(std::floor(b.size_h() / d + 1e-9));
    for (int k = 0; k <= nx; ++k) out += canvas.line(b.min_x() + k * d, b.min_y(), b.min_x() + k * d, b.max_y(), "");
    for (int k = 0; k <= ny; ++k) out += canvas.line(b.min_x(), b.min_y() + k * d, b.max_x(), b.min_y() + k * d, "");
    out += "</g>\n";
  }
  for (const auto& e : scene.fixed) {
    out += canvas.rect(e.box, "class=\"" + std::string(to_string(e.kind)) + "\" fill=\"" + fill_for(e.kind) + "\"",
                       escape(e.label));
  }
  for (int i = 0; i < 2; ++i) {
    out += canvas.rect(scene.goal[i], "class=\"goal goal-" + std::to_string(i + 1) + "\" fill=\"none\" stroke=\"" +
                                          kFurnitureColor[i] +
                                          "\" stroke-width=\"2\" stroke-dasharray=\"6 4\"");
  }
  out += "</g>\n";
  return out;
}

std::string furniture_layer(const SceneInstance& scene, const std::array<AxisBox, 2>& boxes, const Canvas& canvas) {
  std::string out;
  for (int i = 0; i < 2; ++i) {
    out += canvas.rect(boxes[i], "class=\"furniture furniture-" + std::to_string(i + 1) + "\" fill=\"" +
                                     kFurnitureColor[i] + "\" fill-opacity=\"0.85\" stroke=\"#222222\" "
                                     "stroke-width=\"1\"",
                       escape(scene.furniture[i].label));
  }
  return out;
}

}  // namespace

std::string render_scene_svg(const SceneInstance& scene, const RenderOptions& options) {
  const Canvas canvas(scene, options);
  std::string out = header(canvas);
  out += room_layer(scene, canvas, options);
  out += "<g class=\"frame\" id=\"frame-0\">\n";
  out += furniture_layer(scene, {scene.start[0], scene.start[1]}, canvas);
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_trajectory_svg(const Trajectory& trajectory, const RenderOptions& options) {
  const SceneInstance& scene = *trajectory.scene;
  const Canvas canvas(scene, options);
  std::string out = header(canvas);
  out += room_layer(scene, canvas, options);
  const auto frames = trajectory_frames(trajectory);
  const int n = static_cast<int>(frames.size());
  char buf[256];
  for (int k = 0; k < n; ++k) {
    std::snprintf(buf, sizeof(buf), "<g class=\"frame\" id=\"frame-%d\" visibility=\"%s\">\n", k,
                  n == 1 ? "visible" : "hidden");
    out += buf;
    if (n > 1) {
      const double begin = k * options.frame_seconds;
      if (k + 1 < n) {
        std::snprintf(buf, sizeof(buf),
                      "<set attributeName=\"visibility\" to=\"visible\" begin=\"%.3fs\" dur=\"%.3fs\"/>\n", begin,
                      options.frame_seconds);
      } else {
        std::snprintf(buf, sizeof(buf),
                      "<set attributeName=\"visibility\" to=\"visible\" begin=\"%.3fs\" fill=\"freeze\"/>\n", begin);
      }
      out += buf;
    }
    out += furniture_layer(scene, {place_on_lattice(scene, 0, frames[k][0]), place_on_lattice(scene, 1, frames[k][1])},
                           canvas);
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace furnish
