#pragma once

#include <Eigen/Dense>
#include <vector>

namespace convnote {

// Reverse-mode automatic differentiation over a flat tape of Eigen matrices.
// Nodes are created through Tape methods and referenced by index; backward()
// seeds a 1x1 loss node with gradient 1 and walks the tape in reverse,
// accumulating gradients into every reachable node. Column vectors are Nx1
// matrices; scalars are 1x1.

enum class Op {
    Leaf,
    MatMul,       // a * b
    Add,          // a + b, same shape
    Sub,          // a - b
    CMul,         // elementwise a * b
    CMin,         // elementwise min(a, b); ties send the gradient to a
    AddColwise,   // matrix a plus column b broadcast over a's columns
    Sigmoid,
    Tanh,
    Softmax,      // over all entries
    Transpose,
    VConcat,      // stack a over b (rows)
    ConcatCols,   // concatenate columns of many inputs
    PadRows,      // zero rows appended below a
    Pick,         // single entry (row, 0) of a column vector, as 1x1
    Log,          // elementwise natural log
    ScaleBy,      // matrix a scaled by 1x1 node b
    AffineConst,  // alpha * a + beta, elementwise constants
    ScatterSum,   // column a summed into rows[i] of a taller zero column
    SumElements,  // sum of all entries, as 1x1
    EmbedCol,     // column indices[i] of matrix a gathered side by side
};

struct TapeNode {
    Op op = Op::Leaf;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    int a = -1;
    int b = -1;
    std::vector<int> inputs;   // ConcatCols
    std::vector<int> indices;  // Pick / ScatterSum / EmbedCol
    double alpha = 0.0;
    double beta = 0.0;
};

class Tape {
  public:
    int leaf(const Eigen::MatrixXd& value);
    int matmul(int a, int b);
    int add(int a, int b);
    int sub(int a, int b);
    int cmul(int a, int b);
    int cmin(int a, int b);
    int add_colwise(int a, int b);
    int sigmoid(int a);
    int tanh(int a);
    int softmax(int a);
    int transpose(int a);
    int vconcat(int a, int b);
    int concat_cols(const std::vector<int>& xs);
    int pad_rows(int a, int rows_out);
    int pick(int a, int row);
    int log(int a);
    int scale_by(int a, int s);
    int affine_const(int a, double alpha, double beta);
    int scatter_sum(int a, const std::vector<int>& rows, int rows_out);
    int sum_elements(int a);
    int embed_col(int a, const std::vector<int>& columns);

    const Eigen::MatrixXd& value(int i) const { return nodes_[i].value; }
    const Eigen::MatrixXd& grad(int i) const { return nodes_[i].grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Propagates from a 1x1 loss node; throws ValidationError otherwise.
    void backward(int loss);

  private:
    int push(TapeNode node);
    std::vector<TapeNode> nodes_;
};

}  // namespace convnote
