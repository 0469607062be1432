#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hotelling/error.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/scenario.hpp"

namespace hotelling {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kFigureMargin = 20.0;
constexpr double kFigureSide = 400.0;
constexpr double kCaptionHeight = 40.0;

ordered_json point_json(Point p) { return ordered_json::array({p.x1, p.x2}); }

ordered_json points_json(const std::vector<Point>& points) {
    auto out = ordered_json::array();
    for (const auto& p : points) out.push_back(point_json(p));
    return out;
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

Point point_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::invalid_argument, "point must be [x1, x2]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point> points_from(const nlohmann::json& j) {
    std::vector<Point> out;
    for (const auto& p : j) out.push_back(point_from(p));
    return out;
}

template <class T>
std::optional<T> optional_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double screen_x(double x1) { return kFigureMargin + kFigureSide * x1; }
double screen_y(double x2) { return kFigureMargin + kFigureSide * (1.0 - x2); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string records_to_json(const std::vector<ResultRecord>& records) {
    auto out = ordered_json::array();
    for (const auto& r : records) {
        ordered_json j;
        j["schema"] = kResultSchema;
        j["scenario"] = r.scenario;
        j["kind"] = r.kind;
        j["status"] = r.status;
        j["message"] = r.message;
        j["n"] = r.n;
        j["market_size"] = r.market_size;
        j["configuration"] = points_json(r.configuration);
        j["prices"] = r.prices;
        j["demand"] = r.demand;
        j["profits"] = r.profits;
        j["regime"] = r.regime;
        j["entrant_blocked"] = r.entrant_blocked;
        j["best_entrant_profit"] = r.best_entrant_profit;
        j["best_entrant_location"] =
            r.best_entrant_location ? point_json(*r.best_entrant_location) : ordered_json(nullptr);
        j["social_cost"] = r.social_cost;
        j["m_enter"] = optional_json(r.m_enter);
        j["m_max_deter"] = optional_json(r.m_max_deter);
        j["monotone"] = optional_json(r.monotone);
        j["prices_converged"] = r.prices_converged;
        j["price_iterations"] = r.price_iterations;
        j["price_spread"] = r.price_spread;
        j["price_residual"] = r.price_residual;
        j["first_choice_ties"] = points_json(r.first_choice_ties);
        j["local_optimum_spread"] = optional_json(r.local_optimum_spread);
        out.push_back(std::move(j));
    }
    // Doubles are written in shortest round-trip form, so a reload is exact.
    return out.dump(2) + "\n";
}

std::vector<ResultRecord> records_from_json(const std::string& text) {
    std::vector<ResultRecord> records;
    try {
        const auto doc = nlohmann::json::parse(text);
        if (!doc.is_array()) throw Error(ErrorCode::invalid_argument, "results must be a JSON array");
        for (const auto& j : doc) {
            if (j.at("schema").get<int>() != kResultSchema) {
                throw Error(ErrorCode::invalid_argument, "unsupported result schema");
            }
            ResultRecord r;
            r.scenario = j.at("scenario").get<std::string>();
            r.kind = j.at("kind").get<std::string>();
            r.status = j.at("status").get<std::string>();
            r.message = j.at("message").get<std::string>();
            r.n = j.at("n").get<int>();
            r.market_size = j.at("market_size").get<double>();
            r.configuration = points_from(j.at("configuration"));
            r.prices = j.at("prices").get<std::vector<double>>();
            r.demand = j.at("demand").get<std::vector<double>>();
            r.profits = j.at("profits").get<std::vector<double>>();
            r.regime = j.at("regime").get<std::string>();
            r.entrant_blocked = j.at("entrant_blocked").get<bool>();
            r.best_entrant_profit = j.at("best_entrant_profit").get<double>();
            if (!j.at("best_entrant_location").is_null()) {
                r.best_entrant_location = point_from(j.at("best_entrant_location"));
            }
            r.social_cost = j.at("social_cost").get<double>();
            r.m_enter = optional_from<double>(j.at("m_enter"));
            r.m_max_deter = optional_from<double>(j.at("m_max_deter"));
            r.monotone = optional_from<bool>(j.at("monotone"));
            r.prices_converged = j.at("prices_converged").get<bool>();
            r.price_iterations = j.at("price_iterations").get<int>();
            r.price_spread = j.at("price_spread").get<double>();
            r.price_residual = j.at("price_residual").get<double>();
            r.first_choice_ties = points_from(j.at("first_choice_ties"));
            r.local_optimum_spread = optional_from<double>(j.at("local_optimum_spread"));
            records.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed results: ") + e.what());
    }
    return records;
}

std::string emit_figure(const ResultRecord& record) {
    const double width = 2.0 * kFigureMargin + kFigureSide;
    const double height = width + kCaptionHeight;
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    if (!record.configuration.empty()) {
        for (const auto& cell : voronoi_cells(record.configuration)) {
            svg << "<polygon points=\"";
            for (std::size_t k = 0; k < cell.vertices.size(); ++k) {
                svg << (k ? " " : "") << fmt("%.3f", screen_x(cell.vertices[k].x1)) << ","
                    << fmt("%.3f", screen_y(cell.vertices[k].x2));
            }
            svg << "\" fill=\"#eef3f8\" stroke=\"#8a9bb0\" stroke-width=\"1\"/>\n";
        }
    }
    svg << "<rect x=\"" << kFigureMargin << "\" y=\"" << kFigureMargin << "\" width=\"" << kFigureSide
        << "\" height=\"" << kFigureSide << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < record.configuration.size(); ++i) {
        const double x = screen_x(record.configuration[i].x1);
        const double y = screen_y(record.configuration[i].x2);
        svg << "<circle cx=\"" << fmt("%.3f", x) << "\" cy=\"" << fmt("%.3f", y)
            << "\" r=\"9\" fill=\"#1f3b5c\"/>\n"
            << "<text x=\"" << fmt("%.3f", x) << "\" y=\"" << fmt("%.3f", y + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"white\" text-anchor=\"middle\">" << i + 1
            << "</text>\n";
    }
    const std::string regime = record.kind == "social_optimum" ? "social optimum" : record.regime;
    svg << "<text x=\"" << kFigureMargin << "\" y=\"" << width + kCaptionHeight / 2.0
        << "\" font-family=\"sans-serif\" font-size=\"14\">n = " << record.configuration.size()
        << ", M = " << fmt("%.4g", record.market_size) << ", " << regime << "</text>\n"
        << "</svg>\n";
    return svg.str();
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream csv;
    csv << "scenario,kind,status,n,market_size,regime,firm,x1,x2,price,demand,profit\n";
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.configuration.size(); ++i) {
            const auto at = [&](const std::vector<double>& v) {
                return i < v.size() ? fmt("%.10g", v[i]) : std::string();
            };
            csv << csv_field(r.scenario) << "," << r.kind << "," << r.status << "," << r.n << ","
                << fmt("%.10g", r.market_size) << "," << r.regime << "," << i + 1 << ","
                << fmt("%.10g", r.configuration[i].x1) << "," << fmt("%.10g", r.configuration[i].x2) << ","
                << at(r.prices) << "," << at(r.demand) << "," << at(r.profits) << "\n";
        }
    }
    return csv.str();
}

}  // namespace hotelling
