#include "convnote/autodiff.hpp"

#include <cmath>

#include "convnote/error.hpp"

namespace convnote {

int Tape::push(TapeNode node) {
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(const Eigen::MatrixXd& value) {
    TapeNode n;
    n.op = Op::Leaf;
    n.value = value;
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    TapeNode n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value * nodes_[b].value;
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    TapeNode n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value + nodes_[b].value;
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    TapeNode n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value - nodes_[b].value;
    return push(std::move(n));
}

int Tape::cmul(int a, int b) {
    TapeNode n;
    n.op = Op::CMul;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value.cwiseProduct(nodes_[b].value);
    return push(std::move(n));
}

int Tape::cmin(int a, int b) {
    TapeNode n;
    n.op = Op::CMin;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value.cwiseMin(nodes_[b].value);
    return push(std::move(n));
}

int Tape::add_colwise(int a, int b) {
    TapeNode n;
    n.op = Op::AddColwise;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value.colwise() + Eigen::VectorXd(nodes_[b].value.col(0));
    return push(std::move(n));
}

int Tape::sigmoid(int a) {
    TapeNode n;
    n.op = Op::Sigmoid;
    n.a = a;
    n.value = nodes_[a].value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    return push(std::move(n));
}

int Tape::tanh(int a) {
    TapeNode n;
    n.op = Op::Tanh;
    n.a = a;
    n.value = nodes_[a].value.array().tanh().matrix();
    return push(std::move(n));
}

int Tape::softmax(int a) {
    TapeNode n;
    n.op = Op::Softmax;
    n.a = a;
    const auto& x = nodes_[a].value;
    double max = x.maxCoeff();
    Eigen::ArrayXXd e = (x.array() - max).exp();
    n.value = (e / e.sum()).matrix();
    return push(std::move(n));
}

int Tape::transpose(int a) {
    TapeNode n;
    n.op = Op::Transpose;
    n.a = a;
    n.value = nodes_[a].value.transpose();
    return push(std::move(n));
}

int Tape::vconcat(int a, int b) {
    TapeNode n;
    n.op = Op::VConcat;
    n.a = a;
    n.b = b;
    const auto& va = nodes_[a].value;
    const auto& vb = nodes_[b].value;
    n.value.resize(va.rows() + vb.rows(), va.cols());
    n.value.topRows(va.rows()) = va;
    n.value.bottomRows(vb.rows()) = vb;
    return push(std::move(n));
}

int Tape::concat_cols(const std::vector<int>& xs) {
    TapeNode n;
    n.op = Op::ConcatCols;
    n.inputs = xs;
    Eigen::Index rows = nodes_[xs.front()].value.rows();
    Eigen::Index cols = 0;
    for (int x : xs) cols += nodes_[x].value.cols();
    n.value.resize(rows, cols);
    Eigen::Index at = 0;
    for (int x : xs) {
        const auto& v = nodes_[x].value;
        n.value.middleCols(at, v.cols()) = v;
        at += v.cols();
    }
    return push(std::move(n));
}

int Tape::pad_rows(int a, int rows_out) {
    TapeNode n;
    n.op = Op::PadRows;
    n.a = a;
    const auto& v = nodes_[a].value;
    n.value = Eigen::MatrixXd::Zero(rows_out, v.cols());
    n.value.topRows(v.rows()) = v;
    return push(std::move(n));
}

int Tape::pick(int a, int row) {
    TapeNode n;
    n.op = Op::Pick;
    n.a = a;
    n.indices = {row};
    n.value = Eigen::MatrixXd::Constant(1, 1, nodes_[a].value(row, 0));
    return push(std::move(n));
}

int Tape::log(int a) {
    TapeNode n;
    n.op = Op::Log;
    n.a = a;
    n.value = nodes_[a].value.array().log().matrix();
    return push(std::move(n));
}

int Tape::scale_by(int a, int s) {
    TapeNode n;
    n.op = Op::ScaleBy;
    n.a = a;
    n.b = s;
    n.value = nodes_[a].value * nodes_[s].value(0, 0);
    return push(std::move(n));
}

int Tape::affine_const(int a, double alpha, double beta) {
    TapeNode n;
    n.op = Op::AffineConst;
    n.a = a;
    n.alpha = alpha;
    n.beta = beta;
    n.value = (alpha * nodes_[a].value.array() + beta).matrix();
    return push(std::move(n));
}

int Tape::scatter_sum(int a, const std::vector<int>& rows, int rows_out) {
    TapeNode n;
    n.op = Op::ScatterSum;
    n.a = a;
    n.indices = rows;
    const auto& v = nodes_[a].value;
    n.value = Eigen::MatrixXd::Zero(rows_out, 1);
    for (Eigen::Index i = 0; i < v.rows(); ++i) n.value(rows[i], 0) += v(i, 0);
    return push(std::move(n));
}

int Tape::sum_elements(int a) {
    TapeNode n;
    n.op = Op::SumElements;
    n.a = a;
    n.value = Eigen::MatrixXd::Constant(1, 1, nodes_[a].value.sum());
    return push(std::move(n));
}

int Tape::embed_col(int a, const std::vector<int>& columns) {
    TapeNode n;
    n.op = Op::EmbedCol;
    n.a = a;
    n.indices = columns;
    const auto& v = nodes_[a].value;
    n.value.resize(v.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) n.value.col(i) = v.col(columns[i]);
    return push(std::move(n));
}

void Tape::backward(int loss) {
    if (nodes_[loss].value.rows() != 1 || nodes_[loss].value.cols() != 1)
        throw ValidationError("backward target must be a 1x1 node");
    for (auto& n : nodes_) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    nodes_[loss].grad(0, 0) = 1.0;

    for (int i = loss; i >= 0; --i) {
        TapeNode& n = nodes_[i];
        const Eigen::MatrixXd& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul:
                nodes_[n.a].grad.noalias() += g * nodes_[n.b].value.transpose();
                nodes_[n.b].grad.noalias() += nodes_[n.a].value.transpose() * g;
                break;
            case Op::Add:
                nodes_[n.a].grad += g;
                nodes_[n.b].grad += g;
                break;
            case Op::Sub:
                nodes_[n.a].grad += g;
                nodes_[n.b].grad -= g;
                break;
            case Op::CMul:
                nodes_[n.a].grad.array() += g.array() * nodes_[n.b].value.array();
                nodes_[n.b].grad.array() += g.array() * nodes_[n.a].value.array();
                break;
            case Op::CMin: {
                const auto& va = nodes_[n.a].value.array();
                const auto& vb = nodes_[n.b].value.array();
                auto to_a = (va <= vb).cast<double>();
                nodes_[n.a].grad.array() += g.array() * to_a;
                nodes_[n.b].grad.array() += g.array() * (1.0 - to_a);
                break;
            }
            case Op::AddColwise:
                nodes_[n.a].grad += g;
                nodes_[n.b].grad.col(0) += g.rowwise().sum();
                break;
            case Op::Sigmoid:
                nodes_[n.a].grad.array() +=
                    g.array() * n.value.array() * (1.0 - n.value.array());
                break;
            case Op::Tanh:
                nodes_[n.a].grad.array() += g.array() * (1.0 - n.value.array().square());
                break;
            case Op::Softmax: {
                double dot = (n.value.array() * g.array()).sum();
                nodes_[n.a].grad.array() += n.value.array() * (g.array() - dot);
                break;
            }
            case Op::Transpose:
                nodes_[n.a].grad += g.transpose();
                break;
            case Op::VConcat: {
                Eigen::Index ra = nodes_[n.a].value.rows();
                nodes_[n.a].grad += g.topRows(ra);
                nodes_[n.b].grad += g.bottomRows(g.rows() - ra);
                break;
            }
            case Op::ConcatCols: {
                Eigen::Index at = 0;
                for (int x : n.inputs) {
                    Eigen::Index c = nodes_[x].value.cols();
                    nodes_[x].grad += g.middleCols(at, c);
                    at += c;
                }
                break;
            }
            case Op::PadRows:
                nodes_[n.a].grad += g.topRows(nodes_[n.a].value.rows());
                break;
            case Op::Pick:
                nodes_[n.a].grad(n.indices[0], 0) += g(0, 0);
                break;
            case Op::Log:
                nodes_[n.a].grad.array() += g.array() / nodes_[n.a].value.array();
                break;
            case Op::ScaleBy:
                nodes_[n.a].grad += g * nodes_[n.b].value(0, 0);
                nodes_[n.b].grad(0, 0) += (nodes_[n.a].value.array() * g.array()).sum();
                break;
            case Op::AffineConst:
                nodes_[n.a].grad += n.alpha * g;
                break;
            case Op::ScatterSum:
                for (Eigen::Index r = 0; r < nodes_[n.a].value.rows(); ++r)
                    nodes_[n.a].grad(r, 0) += g(n.indices[r], 0);
                break;
            case Op::SumElements:
                nodes_[n.a].grad.array() += g(0, 0);
                break;
            case Op::EmbedCol:
                for (std::size_t c = 0; c < n.indices.size(); ++c)
                    nodes_[n.a].grad.col(n.indices[c]) += g.col(c);
                break;
        }
    }
}

}  // namespace convnote
