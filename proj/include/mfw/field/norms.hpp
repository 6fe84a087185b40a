#pragma once

#include "mfw/field/field.hpp"

namespace mfw::field {

struct NormKind {
    enum class Tag { L2, H1Sobolev, Hm1Dual, Lp } tag = Tag::L2;
    double p = 2.0; // exponent for Lp

    static NormKind l2() { return {Tag::L2, 2.0}; }
    static NormKind h1() { return {Tag::H1Sobolev, 2.0}; }
    static NormKind hm1() { return {Tag::Hm1Dual, 2.0}; }
    static NormKind lp(double p) { return {Tag::Lp, p}; }
};

double norm(const Field& u, NormKind kind);
double inner(const Field& u, const Field& v, NormKind kind);

// h-weighted l2 dot, shared building block
double dot_l2(const Field& u, const Field& v);

} // namespace mfw::field
