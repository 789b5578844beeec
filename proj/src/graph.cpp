#include "glad/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace glad {

using nlohmann::json;

namespace {

int64_t edge_key(int src_row, int dst_row) {
  return (static_cast<int64_t>(src_row) << 32) | static_cast<uint32_t>(dst_row);
}

std::vector<std::string> string_list(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field) || !j[field].is_array())
    throw Error(where + ": missing or non-array field '" + field + "'");
  std::vector<std::string> out;
  for (const auto& v : j[field]) {
    if (!v.is_string()) throw Error(where + ": non-string entry in '" + field + "'");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_field(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field) || !j[field].is_string())
    throw Error(where + ": missing or non-string field '" + field + "'");
  return j[field].get<std::string>();
}

}  // namespace

CitationNetwork CitationNetwork::build(std::vector<Paper> papers,
                                       std::vector<CitationEdge> edges) {
  CitationNetwork net;
  std::sort(papers.begin(), papers.end(),
            [](const Paper& a, const Paper& b) { return a.id < b.id; });
  net.papers_ = std::move(papers);

  for (size_t i = 0; i < net.papers_.size(); ++i) {
    const Paper& p = net.papers_[i];
    if (!net.row_of_.emplace(p.id, static_cast<int>(i)).second)
      throw Error("duplicate paper id: " + p.id);
    if (p.abstract_text.empty()) net.missing_abstracts_.push_back(p.id);
  }

  // Reference lists must resolve within the network.
  std::vector<std::string> dangling;
  for (const Paper& p : net.papers_)
    for (const std::string& ref : p.reference_ids)
      if (!net.row_of_.count(ref)) dangling.push_back(p.id + " -> " + ref);

  const int n = net.n1();
  net.out_degree_.assign(static_cast<size_t>(n), 0);
  net.in_degree_.assign(static_cast<size_t>(n), 0);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges.size());

  for (size_t e = 0; e < edges.size(); ++e) {
    const CitationEdge& edge = edges[e];
    auto src_it = net.row_of_.find(edge.src);
    auto dst_it = net.row_of_.find(edge.dst);
    if (src_it == net.row_of_.end()) dangling.push_back("edge " + std::to_string(e) + " src " + edge.src);
    if (dst_it == net.row_of_.end()) dangling.push_back("edge " + std::to_string(e) + " dst " + edge.dst);
    if (src_it == net.row_of_.end() || dst_it == net.row_of_.end()) continue;
    if (edge.src == edge.dst) throw Error("self-citation rejected: " + edge.src);
    int sr = src_it->second, dr = dst_it->second;
    if (!net.edge_lookup_.emplace(edge_key(sr, dr), static_cast<int>(net.edges_.size())).second)
      throw Error("duplicate edge: " + edge.src + " -> " + edge.dst);
    net.endpoints_.emplace_back(sr, dr);
    net.edges_.push_back(edge);
    net.out_degree_[static_cast<size_t>(sr)] += 1;
    net.in_degree_[static_cast<size_t>(dr)] += 1;
    trips.emplace_back(sr, dr, 1.0);
  }

  if (!dangling.empty()) {
    std::ostringstream msg;
    msg << "dangling ids (" << dangling.size() << "):";
    for (size_t i = 0; i < dangling.size() && i < 20; ++i) msg << " " << dangling[i];
    if (dangling.size() > 20) msg << " ...";
    throw Error(msg.str());
  }

  net.adjacency_.resize(n, n);
  net.adjacency_.setFromTriplets(trips.begin(), trips.end());
  net.adjacency_.makeCompressed();
  return net;
}

CitationNetwork CitationNetwork::from_files(const std::string& papers_path,
                                            const std::string& citations_path) {
  std::ifstream pf(papers_path);
  if (!pf) throw Error("cannot open papers file: " + papers_path);
  std::vector<Paper> papers;
  std::string line;
  int line_no = 0;
  while (std::getline(pf, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(papers_path + ":" + std::to_string(line_no) + ": parse error: " + e.what());
    }
    std::string where = papers_path + ":" + std::to_string(line_no);
    Paper p;
    p.id = string_field(j, "id", where);
    p.title = string_field(j, "title", where);
    p.abstract_text = string_field(j, "abstract", where);
    p.journal_id = string_field(j, "journal_id", where);
    if (!j.contains("year") || !j["year"].is_number_integer())
      throw Error(where + ": missing or non-integer field 'year'");
    p.year = j["year"].get<int>();
    p.author_ids = string_list(j, "author_ids", where);
    p.institution_ids = string_list(j, "institution_ids", where);
    p.reference_ids = string_list(j, "reference_ids", where);
    papers.push_back(std::move(p));
  }

  std::ifstream cf(citations_path);
  if (!cf) throw Error("cannot open citations file: " + citations_path);
  std::vector<CitationEdge> edges;
  line_no = 0;
  while (std::getline(cf, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(citations_path + ":" + std::to_string(line_no) + ": parse error: " + e.what());
    }
    std::string where = citations_path + ":" + std::to_string(line_no);
    CitationEdge e;
    e.src = string_field(j, "src", where);
    e.dst = string_field(j, "dst", where);
    e.context = string_field(j, "context", where);
    if (!j.contains("label") || !j["label"].is_number_integer())
      throw Error(where + ": missing or non-integer field 'label'");
    int lab = j["label"].get<int>();
    if (lab != 0 && lab != 1 && lab != -1)
      throw Error(where + ": label must be 0, 1 or -1, got " + std::to_string(lab));
    e.label = static_cast<EdgeLabel>(lab);
    edges.push_back(std::move(e));
  }

  return build(std::move(papers), std::move(edges));
}

int CitationNetwork::row_of(const std::string& id) const {
  auto it = row_of_.find(id);
  if (it == row_of_.end()) throw Error("unknown paper id: " + id);
  return it->second;
}

int CitationNetwork::edge_index(const std::string& src, const std::string& dst) const {
  auto s = row_of_.find(src);
  auto d = row_of_.find(dst);
  if (s == row_of_.end() || d == row_of_.end()) return -1;
  auto it = edge_lookup_.find(edge_key(s->second, d->second));
  return it == edge_lookup_.end() ? -1 : it->second;
}

void CitationNetwork::export_files(const std::string& papers_path,
                                   const std::string& citations_path) const {
  std::ofstream pf(papers_path);
  if (!pf) throw Error("cannot open for writing: " + papers_path);
  for (const Paper& p : papers_) {
    json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["abstract"] = p.abstract_text;
    j["journal_id"] = p.journal_id;
    j["year"] = p.year;
    j["author_ids"] = p.author_ids;
    j["institution_ids"] = p.institution_ids;
    j["reference_ids"] = p.reference_ids;
    pf << j.dump() << "\n";
  }
  std::ofstream cf(citations_path);
  if (!cf) throw Error("cannot open for writing: " + citations_path);
  for (const CitationEdge& e : edges_) {
    json j;
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["context"] = e.context;
    j["label"] = static_cast<int>(e.label);
    cf << j.dump() << "\n";
  }
}

std::vector<CentralityFeatures> centralities(const CitationNetwork& net) {
  const int n = net.n1();
  if (n < 2) throw Error("centralities: need at least 2 papers");
  const double norm = static_cast<double>(n - 1);

  // Aggregate degree totals per first author.
  std::unordered_map<std::string, long> author_in, author_out;
  for (int v = 0; v < n; ++v) {
    const Paper& p = net.paper_at(v);
    if (p.author_ids.empty()) continue;
    const std::string& fa = p.author_ids.front();
    author_in[fa] += net.in_degree()[static_cast<size_t>(v)];
    author_out[fa] += net.out_degree()[static_cast<size_t>(v)];
  }

  std::vector<CentralityFeatures> out(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    const Paper& p = net.paper_at(v);
    CentralityFeatures& c = out[static_cast<size_t>(v)];
    c.p_odc = static_cast<double>(net.out_degree()[static_cast<size_t>(v)]) / norm;
    if (!p.author_ids.empty()) {
      const std::string& fa = p.author_ids.front();
      c.a_cic = std::min(1.0, static_cast<double>(author_in[fa]) / norm);
      c.a_coc = std::min(1.0, static_cast<double>(author_out[fa]) / norm);
    }
  }
  return out;
}

}  // namespace glad
