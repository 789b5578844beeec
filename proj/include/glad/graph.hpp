#pragma once

#include "glad/common.hpp"

#include <Eigen/Sparse>

#include <string>
#include <unordered_map>
#include <vector>

namespace glad {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Paper {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::string journal_id;
  int year = 0;
  std::vector<std::string> author_ids;       // first author first
  std::vector<std::string> institution_ids;
  std::vector<std::string> reference_ids;    // full outgoing reference list
};

enum class EdgeLabel : int { Normal = 0, Anomalous = 1, Unknown = -1 };

struct CitationEdge {
  std::string src;      // citing paper
  std::string dst;      // cited paper
  std::string context;  // may be empty
  EdgeLabel label = EdgeLabel::Unknown;
};

// Directed citation network. Immutable after construction; node rows are
// ordered by sorted paper id so every downstream matrix is reproducible.
class CitationNetwork {
 public:
  CitationNetwork() = default;  // empty network

  static CitationNetwork build(std::vector<Paper> papers, std::vector<CitationEdge> edges);
  static CitationNetwork from_files(const std::string& papers_path,
                                    const std::string& citations_path);

  int n1() const { return static_cast<int>(papers_.size()); }
  int n2() const { return static_cast<int>(edges_.size()); }

  bool has_paper(const std::string& id) const { return row_of_.count(id) > 0; }
  int row_of(const std::string& id) const;
  const Paper& paper_at(int row) const { return papers_.at(static_cast<size_t>(row)); }
  const std::vector<Paper>& papers() const { return papers_; }

  const std::vector<CitationEdge>& edges() const { return edges_; }
  // Endpoint rows of edge e, (citing_row, cited_row).
  std::pair<int, int> edge_endpoints(int e) const { return endpoints_.at(static_cast<size_t>(e)); }
  // Index of edge (src,dst) or -1.
  int edge_index(const std::string& src, const std::string& dst) const;

  const SparseMat& adjacency() const { return adjacency_; }
  const std::vector<int>& out_degree() const { return out_degree_; }
  const std::vector<int>& in_degree() const { return in_degree_; }

  // Papers ingested with an empty abstract (they get the zero document
  // vector downstream).
  const std::vector<std::string>& missing_abstract_ids() const { return missing_abstracts_; }

  void export_files(const std::string& papers_path, const std::string& citations_path) const;

 private:
  std::vector<Paper> papers_;  // sorted by id
  std::unordered_map<std::string, int> row_of_;
  std::vector<CitationEdge> edges_;  // file order
  std::vector<std::pair<int, int>> endpoints_;
  std::unordered_map<int64_t, int> edge_lookup_;
  SparseMat adjacency_;
  std::vector<int> out_degree_, in_degree_;
  std::vector<std::string> missing_abstracts_;
};

struct CentralityFeatures {
  double a_cic = 0.0;  // in-degree centrality aggregated over the first author's papers
  double a_coc = 0.0;  // out-degree analogue
  double p_odc = 0.0;  // paper out-degree centrality
};

// Per-row centralities, (n1-1)-normalized and clamped to [0,1].
// Requires n1 >= 2. Papers without authors get zero author centralities.
std::vector<CentralityFeatures> centralities(const CitationNetwork& net);

}  // namespace glad
