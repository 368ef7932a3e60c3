#include "triad/graph.hpp"

#include <cmath>

#include "triad/loss.hpp"

namespace triad {

Tape::Node& Tape::node(NodeId id) {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw GraphNotRecorded("invalid node id " + std::to_string(id));
    }
    return nodes_[static_cast<std::size_t>(id)];
}

const Tape::Node& Tape::node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw GraphNotRecorded("invalid node id " + std::to_string(id));
    }
    return nodes_[static_cast<std::size_t>(id)];
}

NodeId Tape::push(Node n) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Matrix value) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::parameter(ParamEntry& entry) {
    Node n;
    n.op = Op::Parameter;
    n.value = entry.value;
    n.param = &entry;
    return push(std::move(n));
}

NodeId Tape::affine(NodeId x, NodeId w, NodeId b) {
    const Matrix& xv = node(x).value;
    const Matrix& wv = node(w).value;
    if (xv.cols() != wv.rows()) {
        throw ShapeMismatch("affine: input cols != weight rows");
    }
    Node n;
    n.op = Op::Affine;
    n.a = x;
    n.b = w;
    n.c = b;
    n.value = matmul(xv, wv);
    if (b >= 0) {
        const Matrix& bv = node(b).value;
        if (bv.rows() != 1 || bv.cols() != n.value.cols()) {
            throw ShapeMismatch("affine: bias must be 1 x out");
        }
        for (int i = 0; i < n.value.rows(); ++i) {
            for (int j = 0; j < n.value.cols(); ++j) {
                n.value(i, j) += bv(0, j);
            }
        }
    }
    return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
    Node n;
    n.op = Op::Relu;
    n.a = x;
    n.value = node(x).value;
    for (double& v : n.value.flat()) {
        if (v < 0.0) v = 0.0;
    }
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    if (!av.same_shape(bv)) {
        throw ShapeMismatch("add: shapes differ");
    }
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = av;
    n.value.add_in_place(bv);
    return push(std::move(n));
}

NodeId Tape::axpy(double alpha, NodeId x, NodeId y) {
    const Matrix& xv = node(x).value;
    const Matrix& yv = node(y).value;
    if (!xv.same_shape(yv)) {
        throw ShapeMismatch("axpy: shapes differ");
    }
    Node n;
    n.op = Op::Axpy;
    n.a = x;
    n.b = y;
    n.scalar = alpha;
    n.value = yv;
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value.flat()[i] += alpha * xv.flat()[i];
    }
    return push(std::move(n));
}

NodeId Tape::lerp(NodeId a, NodeId b, double beta) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    if (!av.same_shape(bv)) {
        throw ShapeMismatch("lerp: shapes differ");
    }
    Node n;
    n.op = Op::Lerp;
    n.a = a;
    n.b = b;
    n.scalar = beta;
    n.value = Matrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value.flat()[i] = beta * av.flat()[i] + (1.0 - beta) * bv.flat()[i];
    }
    return push(std::move(n));
}

NodeId Tape::add_row_vector(NodeId x, NodeId v) {
    const Matrix& xv = node(x).value;
    const Matrix& vv = node(v).value;
    if (vv.rows() != 1 || vv.cols() != xv.cols()) {
        throw ShapeMismatch("add_row_vector: vector must be 1 x cols");
    }
    Node n;
    n.op = Op::AddRowVector;
    n.a = x;
    n.b = v;
    n.value = xv;
    for (int i = 0; i < n.value.rows(); ++i) {
        for (int j = 0; j < n.value.cols(); ++j) {
            n.value(i, j) += vv(0, j);
        }
    }
    return push(std::move(n));
}

NodeId Tape::row_normalize(NodeId x) {
    const Matrix& xv = node(x).value;
    Node n;
    n.op = Op::RowNormalize;
    n.a = x;
    n.value = Matrix(xv.rows(), xv.cols());
    n.cache = Matrix(xv.rows(), 2); // used norm, clamp flag
    for (int i = 0; i < xv.rows(); ++i) {
        const double norm = row_norm(xv, i);
        // Norm floored at 1e-12: ReLU-dead rows pass through as zeros instead
        // of aborting the step.
        const bool clamped = !(norm >= 1e-12);
        const double used = clamped ? 1e-12 : norm;
        n.cache(i, 0) = used;
        n.cache(i, 1) = clamped ? 1.0 : 0.0;
        for (int j = 0; j < xv.cols(); ++j) {
            n.value(i, j) = xv(i, j) / used;
        }
    }
    return push(std::move(n));
}

NodeId Tape::info_nce(NodeId anchor, NodeId target, double tau) {
    Node n;
    n.op = Op::InfoNce;
    n.a = anchor;
    n.b = target;
    n.scalar = tau;
    Matrix probs;
    const double loss =
        loss_detail::info_nce_forward(node(anchor).value, node(target).value, tau, &probs);
    n.cache = std::move(probs);
    n.value = Matrix(1, 1);
    n.value(0, 0) = loss;
    return push(std::move(n));
}

NodeId Tape::cosine_distance(NodeId a, NodeId b) {
    Node n;
    n.op = Op::CosineDistance;
    n.a = a;
    n.b = b;
    loss_detail::CosineCache cache;
    const double loss = loss_detail::cosine_distance_forward(node(a).value, node(b).value, &cache);
    const int rows = node(a).value.rows();
    n.cache = Matrix(rows, 3);
    for (int i = 0; i < rows; ++i) {
        n.cache(i, 0) = cache.cos[i];
        n.cache(i, 1) = cache.inv_na[i];
        n.cache(i, 2) = cache.inv_nb[i];
    }
    n.value = Matrix(1, 1);
    n.value(0, 0) = loss;
    return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
    Node n;
    n.op = Op::Sum;
    n.a = x;
    double s = 0.0;
    for (double v : node(x).value.flat()) s += v;
    n.value = Matrix(1, 1);
    n.value(0, 0) = s;
    return push(std::move(n));
}

NodeId Tape::sum_squares(NodeId x) {
    Node n;
    n.op = Op::SumSquares;
    n.a = x;
    double s = 0.0;
    for (double v : node(x).value.flat()) s += v * v;
    n.value = Matrix(1, 1);
    n.value(0, 0) = s;
    return push(std::move(n));
}

NodeId Tape::weighted_sum(const std::vector<NodeId>& terms, const std::vector<double>& weights) {
    if (terms.size() != weights.size() || terms.empty()) {
        throw ShapeMismatch("weighted_sum: terms and weights must match and be non-empty");
    }
    Node n;
    n.op = Op::WeightedSum;
    n.terms = terms;
    n.weights = weights;
    double s = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const Matrix& tv = node(terms[k]).value;
        if (tv.rows() != 1 || tv.cols() != 1) {
            throw ShapeMismatch("weighted_sum: all terms must be scalars");
        }
        s += weights[k] * tv(0, 0);
    }
    n.value = Matrix(1, 1);
    n.value(0, 0) = s;
    return push(std::move(n));
}

void Tape::backward(NodeId root) {
    if (nodes_.empty()) {
        throw GraphNotRecorded("backward on an empty tape");
    }
    Node& r = node(root);
    if (r.value.rows() != 1 || r.value.cols() != 1) {
        throw GraphNotRecorded("backward root must be a scalar node");
    }
    r.grad(0, 0) = 1.0;
    for (NodeId id = root; id >= 0; --id) {
        backward_node(nodes_[static_cast<std::size_t>(id)]);
    }
}

void Tape::backward_node(Node& n) {
    const Matrix& g = n.grad;
    switch (n.op) {
    case Op::Constant:
        break;
    case Op::Parameter:
        n.param->grad.add_in_place(g);
        break;
    case Op::Affine: {
        Node& x = node(n.a);
        Node& w = node(n.b);
        x.grad.add_in_place(matmul_nt(g, w.value));
        w.grad.add_in_place(matmul_tn(x.value, g));
        if (n.c >= 0) {
            node(n.c).grad.add_in_place(col_sums(g));
        }
        break;
    }
    case Op::Relu: {
        Node& x = node(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x.value.flat()[i] > 0.0) {
                x.grad.flat()[i] += g.flat()[i];
            }
        }
        break;
    }
    case Op::Add:
        node(n.a).grad.add_in_place(g);
        node(n.b).grad.add_in_place(g);
        break;
    case Op::Axpy: {
        Node& x = node(n.a);
        Node& y = node(n.b);
        y.grad.add_in_place(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            x.grad.flat()[i] += n.scalar * g.flat()[i];
        }
        break;
    }
    case Op::Lerp: {
        Node& a = node(n.a);
        Node& b = node(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            a.grad.flat()[i] += n.scalar * g.flat()[i];
            b.grad.flat()[i] += (1.0 - n.scalar) * g.flat()[i];
        }
        break;
    }
    case Op::AddRowVector:
        node(n.a).grad.add_in_place(g);
        node(n.b).grad.add_in_place(col_sums(g));
        break;
    case Op::RowNormalize: {
        Node& x = node(n.a);
        // d/dx_i of y_i = x_i/||x_i||: project the upstream gradient off the
        // unit direction, then divide by the norm. Below the clamp the
        // divisor is a constant, so no projection applies.
        for (int i = 0; i < g.rows(); ++i) {
            const double inv_norm = 1.0 / n.cache(i, 0);
            if (n.cache(i, 1) != 0.0) {
                for (int j = 0; j < g.cols(); ++j) {
                    x.grad(i, j) += g(i, j) * inv_norm;
                }
                continue;
            }
            double dot = 0.0;
            for (int j = 0; j < g.cols(); ++j) {
                dot += g(i, j) * n.value(i, j);
            }
            for (int j = 0; j < g.cols(); ++j) {
                x.grad(i, j) += (g(i, j) - dot * n.value(i, j)) * inv_norm;
            }
        }
        break;
    }
    case Op::InfoNce: {
        Node& a = node(n.a);
        Node& t = node(n.b);
        const double gscale = g(0, 0);
        if (gscale == 0.0) break;
        const int b = n.cache.rows();
        // dL/dlogits = (probs - I)/B; chain through logits = A T^T / tau.
        Matrix dz = n.cache;
        for (int i = 0; i < b; ++i) {
            dz(i, i) -= 1.0;
        }
        dz.scale_in_place(gscale / (static_cast<double>(b) * n.scalar));
        a.grad.add_in_place(matmul(dz, t.value));
        t.grad.add_in_place(matmul_tn(dz, a.value));
        break;
    }
    case Op::CosineDistance: {
        Node& a = node(n.a);
        Node& b = node(n.b);
        const double gscale = g(0, 0);
        if (gscale == 0.0) break;
        const int rows = n.cache.rows();
        const double w = -gscale / rows;
        for (int i = 0; i < rows; ++i) {
            const double c = n.cache(i, 0);
            const double inv_na = n.cache(i, 1);
            const double inv_nb = n.cache(i, 2);
            for (int j = 0; j < a.value.cols(); ++j) {
                a.grad(i, j) += w * (b.value(i, j) * inv_na * inv_nb -
                                     c * a.value(i, j) * inv_na * inv_na);
                b.grad(i, j) += w * (a.value(i, j) * inv_na * inv_nb -
                                     c * b.value(i, j) * inv_nb * inv_nb);
            }
        }
        break;
    }
    case Op::Sum: {
        Node& x = node(n.a);
        const double gscale = g(0, 0);
        for (double& v : x.grad.flat()) {
            v += gscale;
        }
        break;
    }
    case Op::SumSquares: {
        Node& x = node(n.a);
        const double gscale = g(0, 0);
        for (std::size_t i = 0; i < x.grad.size(); ++i) {
            x.grad.flat()[i] += 2.0 * gscale * x.value.flat()[i];
        }
        break;
    }
    case Op::WeightedSum: {
        const double gscale = g(0, 0);
        for (std::size_t k = 0; k < n.terms.size(); ++k) {
            node(n.terms[k]).grad(0, 0) += n.weights[k] * gscale;
        }
        break;
    }
    }
}

} // namespace triad
