#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "convnote/error.hpp"
#include "convnote/serialize.hpp"

using namespace convnote;

TEST_CASE("scalar fields round trip") {
    std::stringstream buf;
    write_u32(buf, 0xdeadbeefu);
    write_u64(buf, 0x0123456789abcdefull);
    write_f64(buf, -0.1);
    CHECK(read_u32(buf) == 0xdeadbeefu);
    CHECK(read_u64(buf) == 0x0123456789abcdefull);
    CHECK(read_f64(buf) == -0.1);  // bit-exact by construction
}

TEST_CASE("strings round trip including embedded zero bytes") {
    std::stringstream buf;
    write_string(buf, std::string("a\0b", 3));
    write_string(buf, "");
    write_string_list(buf, {"x", "longer token"});
    CHECK(read_string(buf) == std::string("a\0b", 3));
    CHECK(read_string(buf).empty());
    auto list = read_string_list(buf);
    REQUIRE(list.size() == 2);
    CHECK(list[0] == "x");
    CHECK(list[1] == "longer token");
}

TEST_CASE("matrices round trip bit-exactly") {
    Eigen::MatrixXd m(2, 3);
    m << 1.0, -2.5, 3.25, 1e-300, 0.0, -7.125;
    std::stringstream buf;
    write_matrix(buf, m);
    Eigen::MatrixXd back = read_matrix(buf);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK((back.array() == m.array()).all());

    std::stringstream empty_buf;
    write_matrix(empty_buf, Eigen::MatrixXd(0, 0));
    CHECK(read_matrix(empty_buf).size() == 0);
}

TEST_CASE("magic header validates the format") {
    const char magic[4] = {'T', 'E', 'S', 'T'};
    std::stringstream buf;
    write_magic(buf, magic, 3);
    CHECK(read_magic(buf, magic) == 3);

    const char other[4] = {'E', 'L', 'S', 'E'};
    std::stringstream wrong;
    write_magic(wrong, other, 1);
    CHECK_THROWS_AS(read_magic(wrong, magic), ParseError);
}

TEST_CASE("truncated streams raise ParseError") {
    std::stringstream buf;
    write_u64(buf, 5);  // a string header promising five bytes that never come
    CHECK_THROWS_AS(read_string(buf), ParseError);

    std::stringstream empty;
    CHECK_THROWS_AS(read_u32(empty), ParseError);
}
