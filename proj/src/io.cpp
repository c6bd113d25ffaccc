#include "hycon/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hycon {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_double_short(double x) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

std::vector<double> parse_csv_row(const std::string& line, const std::string& path) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    const std::string cell = line.substr(pos, comma - pos);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
      throw ConfigError(path + ": bad numeric cell '" + cell + "'");
    out.push_back(v);
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  return out;
}

}  // namespace

void write_feature_table(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  out << "#hycon-features v1\n";
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    const Matrix& f = data.features[i];
    out << "[modality " << to_string(m) << " dim " << f.cols() << "]\n";
    for (int r = 0; r < f.rows(); ++r) {
      for (int c = 0; c < f.cols(); ++c) {
        if (c) out << ',';
        out << format_double(f(r, c));
      }
      out << '\n';
    }
  }
  out << "[labels]\n";
  for (double s : data.labels) out << format_double(s) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

Dataset read_feature_table(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "#hycon-features v1")
    throw ConfigError(path + ": missing '#hycon-features v1' header");

  Dataset data;
  bool have_line = false;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    if (!have_line && !std::getline(in, line))
      throw ConfigError(path + ": unexpected end of file before " +
                        std::string(to_string(m)) + " block");
    have_line = false;
    std::istringstream hdr(line);
    std::string bracket, name_token;
    int dim = -1;
    char close = '\0';
    std::string dim_token;
    hdr >> bracket >> name_token >> dim_token >> dim >> close;
    if (bracket != "[modality" || name_token != to_string(m) ||
        dim_token != "dim" || dim < 1 || close != ']')
      throw ConfigError(path + ": expected '[modality " +
                        std::string(to_string(m)) + " dim <n>]', got '" + line + "'");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] == '[') {
        have_line = true;
        break;
      }
      if (line.empty()) continue;
      std::vector<double> row = parse_csv_row(line, path);
      if (static_cast<int>(row.size()) != dim)
        throw ConfigError(path + ": row with " + std::to_string(row.size()) +
                          " values in a dim-" + std::to_string(dim) + " block");
      rows.push_back(std::move(row));
    }
    if (rows.empty())
      throw ConfigError(path + ": empty block for " + std::string(to_string(m)));
    data.features[i] = Matrix::from_rows(rows);
  }

  if (!have_line || line != "[labels]")
    throw ConfigError(path + ": expected '[labels]' block");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0')
      throw ConfigError(path + ": bad label line '" + line + "'");
    data.labels.push_back(SentimentLabel(v).score);  // range check
  }

  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    if (data.features[i].rows() != data.size())
      throw ConfigError(path + ": " + std::string(to_string(m)) + " block has " +
                        std::to_string(data.features[i].rows()) + " rows but " +
                        std::to_string(data.size()) + " labels");
  }
  if (data.size() == 0) throw ConfigError(path + ": no samples");
  return data;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream out = open_out(path);
  out << "regime,seed,acc7,acc2,f1,mae,corr,silhouette\n";
  for (const MetricsRow& r : rows) {
    out << r.regime << ',' << r.seed << ',' << format_double(r.metrics.acc7)
        << ',' << format_double(r.metrics.acc2) << ','
        << format_double(r.metrics.f1) << ',' << format_double(r.metrics.mae)
        << ',' << format_double(r.metrics.corr) << ','
        << format_double(r.silhouette) << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.size())
    throw ConfigError("model file: matrix data length does not match its shape");
  m.data() = data;
  return m;
}

nlohmann::json layer_to_json(const LinearLayer& l) {
  return {{"w", matrix_to_json(l.w)}, {"b", matrix_to_json(l.b)}};
}

LinearLayer layer_from_json(const nlohmann::json& j) {
  return {matrix_from_json(j.at("w")), matrix_from_json(j.at("b"))};
}

}  // namespace

void save_model(const std::string& path, const ModelParams& params) {
  nlohmann::json j;
  j["config"] = {
      {"input_dims", params.config.input_dims},
      {"hidden", params.config.hidden},
      {"embed", params.config.embed},
      {"fusion", to_string(params.config.fusion)},
      {"fuse_normalized", params.config.fuse_normalized},
  };
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    j["encoders"][to_string(m)] = {
        {"l1", layer_to_json(params.encoders[i].l1)},
        {"l2", layer_to_json(params.encoders[i].l2)},
    };
  }
  j["head"] = layer_to_json(params.head);
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

ModelParams load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": bad model JSON: " + e.what());
  }
  try {
    ModelParams p;
    const auto& c = j.at("config");
    p.config.input_dims = c.at("input_dims").get<std::array<int, 3>>();
    p.config.hidden = c.at("hidden").get<int>();
    p.config.embed = c.at("embed").get<int>();
    p.config.fusion = fusion_from_string(c.at("fusion").get<std::string>());
    p.config.fuse_normalized = c.at("fuse_normalized").get<bool>();
    for (Modality m : kModalities) {
      const auto i = static_cast<std::size_t>(index_of(m));
      const auto& e = j.at("encoders").at(to_string(m));
      p.encoders[i].l1 = layer_from_json(e.at("l1"));
      p.encoders[i].l2 = layer_from_json(e.at("l2"));
    }
    p.head = layer_from_json(j.at("head"));
    p.config.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": model JSON missing fields: " + e.what());
  }
}

}  // namespace hycon
