#include <annulus/plot.hpp>

#include <annulus/error.hpp>
#include <annulus/features.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

namespace annulus {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kClassColour[2] = {"#1f77b4", "#d62728"};
constexpr const char* kClassName[2] = {"No-MR", "MR"};

// Fixed precision keeps the files byte-stable across runs.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0, hi = 1;

    void pad() {
        if (!(hi > lo)) { lo -= 0.5; hi += 0.5; }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

class Canvas {
public:
    Canvas(const Provenance& prov, const std::string& title, Range x, Range y) : x_(x), y_(y) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<!-- " << escape(prov.tag()) << " -->\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
             << "<metadata>" << escape(prov.tag()) << "</metadata>\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
             << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
             << "</text>\n";
    }

    double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

    void axes(const std::string& xlabel, const std::string& ylabel) {
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        out_ << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
             << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double vx = x_.lo + i * (x_.hi - x_.lo) / 4, vy = y_.lo + i * (y_.hi - y_.lo) / 4;
            out_ << "<text x=\"" << fmt(px(vx)) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << fmt(vx)
                 << "</text>\n";
            out_ << "<text x=\"" << x0 - 6 << "\" y=\"" << fmt(py(vy) + 4) << "\" text-anchor=\"end\">" << fmt(vy)
                 << "</text>\n";
        }
        out_ << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
             << escape(xlabel) << "</text>\n";
        out_ << "<text transform=\"translate(16," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
             << escape(ylabel) << "</text>\n";
    }

    void circle(double x, double y, const char* colour) {
        out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"3\" fill=\"" << colour
             << "\" fill-opacity=\"0.6\"/>\n";
    }

    void line(double xa, double ya, double xb, double yb, const char* colour, const char* extra = "") {
        out_ << "<line x1=\"" << fmt(px(xa)) << "\" y1=\"" << fmt(py(ya)) << "\" x2=\"" << fmt(px(xb)) << "\" y2=\""
             << fmt(py(yb)) << "\" stroke=\"" << colour << "\" " << extra << "/>\n";
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* colour) {
        out_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) out_ << (i ? " " : "") << fmt(px(xs[i])) << ',' << fmt(py(ys[i]));
        out_ << "\"/>\n";
    }

    void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
        double y = kTop + 16;
        for (const auto& [label, colour] : entries) {
            out_ << "<rect x=\"" << kWidth - kRight - 110 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
                 << colour << "\"/>\n"
                 << "<text x=\"" << kWidth - kRight - 95 << "\" y=\"" << y << "\">" << escape(label) << "</text>\n";
            y += 16;
        }
    }

    void raw(const std::string& s) { out_ << s; }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    Range x_, y_;
    std::ostringstream out_;
};

const std::regex kPhaseTag(R"(CP\d+(-\d+)?$)");

} // namespace

std::string lda_scatter_svg(const FeatureTable& data, const FittedPipeline& pipeline, const Provenance& prov) {
    if (!pipeline.lda) throw Error(ErrorKind::Input, "scatter plot needs a fitted LDA model");
    const auto& w = pipeline.lda->coefficients;
    if (w.size() < 2) throw Error(ErrorKind::Input, "scatter plot needs at least two selected features");

    std::vector<int> order(w.size());
    for (int i = 0; i < w.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(w(a)) > std::abs(w(b)); });
    const int i = order[0], j = order[1];
    const auto cols = pipeline.selection.columns();
    const auto names = pipeline.selection.names();

    const Eigen::VectorXd xs = data.values.col(cols[i]), ys = data.values.col(cols[j]);
    Range rx{xs.minCoeff(), xs.maxCoeff()}, ry{ys.minCoeff(), ys.maxCoeff()};
    rx.pad();
    ry.pad();

    Canvas c(prov, "LDA decision boundary: " + names[i] + " vs " + names[j], rx, ry);
    c.axes(names[i], names[j]);
    for (Eigen::Index r = 0; r < data.rows(); ++r) c.circle(xs(r), ys(r), kClassColour[data.labels(r) == 1]);

    // Boundary in standardized units: w_i z_i + w_j z_j + intercept = 0 with the rest at z = 0.
    const auto& st = pipeline.standardizer;
    const double si = st.scale(i), sj = st.scale(j);
    if (si > 0 && sj > 0 && (w(i) != 0 || w(j) != 0)) {
        const double b = pipeline.lda->intercept;
        auto raw_y = [&](double x) { return st.mean(j) + sj * (-(b + w(i) * (x - st.mean(i)) / si) / w(j)); };
        auto raw_x = [&](double y) { return st.mean(i) + si * (-(b + w(j) * (y - st.mean(j)) / sj) / w(i)); };
        // Clip the line to the plot window.
        std::vector<std::pair<double, double>> ends;
        if (w(j) != 0)
            for (double x : {rx.lo, rx.hi})
                if (const double y = raw_y(x); y >= ry.lo && y <= ry.hi) ends.push_back({x, y});
        if (w(i) != 0)
            for (double y : {ry.lo, ry.hi})
                if (const double x = raw_x(y); x >= rx.lo && x <= rx.hi) ends.push_back({x, y});
        if (ends.size() >= 2)
            c.line(ends[0].first, ends[0].second, ends[1].first, ends[1].second, "black",
                   "stroke-width=\"2\" stroke-dasharray=\"6,4\"");
    }
    c.legend({{kClassName[0], kClassColour[0]}, {kClassName[1], kClassColour[1]}, {"LDA boundary", "black"}});
    return c.finish();
}

std::vector<std::string> feature_family(const std::string& name) {
    const std::string key = family_label(name);
    std::vector<std::string> out;
    for (const auto& n : feature_names())
        if (family_label(n) == key) out.push_back(n);
    if (out.empty()) throw Error(ErrorKind::Input, "unknown feature '" + name + "'");
    return out;
}

std::string family_label(const std::string& name) { return std::regex_replace(name, kPhaseTag, "*"); }

std::string family_profile_svg(const FeatureTable& data, const std::string& name, const Provenance& prov) {
    const auto family = feature_family(name);
    const std::size_t m = family.size();
    std::array<std::vector<double>, 2> mean, lo, hi;
    for (const auto& f : family) {
        const auto it = std::find(data.names.begin(), data.names.end(), f);
        if (it == data.names.end()) throw Error(ErrorKind::Schema, "feature table lacks '" + f + "'");
        const Eigen::VectorXd col = data.values.col(it - data.names.begin());
        for (int c = 0; c < 2; ++c) {
            double s = 0, ss = 0;
            int n = 0;
            for (Eigen::Index r = 0; r < col.size(); ++r)
                if (data.labels(r) == c) { s += col(r); ++n; }
            const double mu = n ? s / n : 0.0;
            for (Eigen::Index r = 0; r < col.size(); ++r)
                if (data.labels(r) == c) ss += (col(r) - mu) * (col(r) - mu);
            const double sd = n ? std::sqrt(ss / n) : 0.0;
            mean[c].push_back(mu);
            lo[c].push_back(mu - sd);
            hi[c].push_back(mu + sd);
        }
    }

    Range rx{-0.5, static_cast<double>(m) - 0.5};
    Range ry{std::min(*std::min_element(lo[0].begin(), lo[0].end()), *std::min_element(lo[1].begin(), lo[1].end())),
             std::max(*std::max_element(hi[0].begin(), hi[0].end()), *std::max_element(hi[1].begin(), hi[1].end()))};
    ry.pad();

    Canvas c(prov, family_label(name) + ": mean ± std by cohort", rx, ry);
    const double y0 = kHeight - kBottom, x0 = kLeft, x1 = kWidth - kRight, y1 = kTop;
    c.raw("<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y1) + "\" width=\"" + fmt(x1 - x0) + "\" height=\"" +
          fmt(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n");
    std::smatch match;
    for (std::size_t k = 0; k < m; ++k) {
        std::regex_search(family[k], match, kPhaseTag);
        c.raw("<text x=\"" + fmt(c.px(static_cast<double>(k))) + "\" y=\"" + fmt(y0 + 16) +
              "\" text-anchor=\"middle\">" + escape(match.str()) + "</text>\n");
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = ry.lo + i * (ry.hi - ry.lo) / 4;
        c.raw("<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(c.py(v) + 4) + "\" text-anchor=\"end\">" + fmt(v) +
              "</text>\n");
    }
    c.raw("<text transform=\"translate(16," + fmt((y0 + y1) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
          escape(family_label(name)) + "</text>\n");

    std::vector<double> xs(m);
    for (int cls = 0; cls < 2; ++cls) {
        const double shift = cls == 0 ? -0.06 : 0.06; // keep the error bars apart
        for (std::size_t k = 0; k < m; ++k) {
            xs[k] = static_cast<double>(k) + shift;
            c.line(xs[k], lo[cls][k], xs[k], hi[cls][k], kClassColour[cls], "stroke-width=\"1.5\"");
        }
        c.polyline(xs, mean[cls], kClassColour[cls]);
        for (std::size_t k = 0; k < m; ++k) c.circle(xs[k], mean[cls][k], kClassColour[cls]);
    }
    c.legend({{kClassName[0], kClassColour[0]}, {kClassName[1], kClassColour[1]}});
    return c.finish();
}

} // namespace annulus
