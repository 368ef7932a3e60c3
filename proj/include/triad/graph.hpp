#pragma once

#include <cstdint>
#include <vector>

#include "triad/matrix.hpp"
#include "triad/param_store.hpp"

namespace triad {

using NodeId = std::int32_t;

/// Reverse-accumulation tape over the fixed operator set this project needs:
/// affine maps, ReLU, residual combinations, row normalization, the
/// contrastive cross-entropy and the row-cosine distance. A forward pass
/// records nodes in topological order; backward() walks them in reverse and
/// accumulates into the ParamStore entries referenced by parameter().
///
/// A tape is built fresh per step and is single-threaded by design.
class Tape {
public:
    /// Leaf that does not receive gradients.
    NodeId constant(Matrix value);

    /// Leaf bound to a store entry; backward() adds into entry.grad.
    NodeId parameter(ParamEntry& entry);

    /// x (B x in) * w (in x out) + row-broadcast bias (1 x out, pass -1 for none).
    NodeId affine(NodeId x, NodeId w, NodeId b);

    NodeId relu(NodeId x);

    NodeId add(NodeId a, NodeId b);

    /// y + alpha * x (residual with fixed scaling).
    NodeId axpy(double alpha, NodeId x, NodeId y);

    /// beta * a + (1 - beta) * b.
    NodeId lerp(NodeId a, NodeId b, double beta);

    /// x + row-broadcast v (v is 1 x cols).
    NodeId add_row_vector(NodeId x, NodeId v);

    /// Row-wise Euclidean normalization.
    NodeId row_normalize(NodeId x);

    /// Contrastive cross-entropy with matched rows as positives; scalar output.
    NodeId info_nce(NodeId anchor, NodeId target, double tau);

    /// 1 - mean row-wise cosine; scalar output.
    NodeId cosine_distance(NodeId a, NodeId b);

    /// Sum of all entries; scalar output.
    NodeId sum(NodeId x);

    /// Sum of squared entries; scalar output.
    NodeId sum_squares(NodeId x);

    /// Weighted sum of scalar nodes; scalar output.
    NodeId weighted_sum(const std::vector<NodeId>& terms, const std::vector<double>& weights);

    /// Reverse sweep from a scalar node. Parameter gradients are accumulated
    /// (not overwritten), so callers zero the store between steps.
    void backward(NodeId root);

    const Matrix& value(NodeId id) const { return node(id).value; }
    const Matrix& grad(NodeId id) const { return node(id).grad; }
    double scalar_value(NodeId id) const { return node(id).value(0, 0); }

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        Constant,
        Parameter,
        Affine,
        Relu,
        Add,
        Axpy,
        Lerp,
        AddRowVector,
        RowNormalize,
        InfoNce,
        CosineDistance,
        Sum,
        SumSquares,
        WeightedSum,
    };

    struct Node {
        Op op;
        Matrix value;
        Matrix grad;
        NodeId a = -1;
        NodeId b = -1;
        NodeId c = -1;            // affine bias
        double scalar = 0.0;      // tau / alpha / beta
        Matrix cache;             // op-specific byproducts of the forward pass
        std::vector<NodeId> terms;
        std::vector<double> weights;
        ParamEntry* param = nullptr;
    };

    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    NodeId push(Node n);
    void backward_node(Node& n);

    std::vector<Node> nodes_;
};

} // namespace triad
