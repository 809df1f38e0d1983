#pragma once

// Reference numbers computed once with mpmath (50 digits) from the defining
// formulas and pasted here.

namespace frozen {

inline constexpr double kJ2At1 = 0.11490348493190048;
inline constexpr double kJ1At4Over4 = -0.016510832005887284;
inline constexpr double kJ1RatioAt0019245 = 0.48100033548186470;

// f0 = 7 GHz, Ic = 2 uA, Q = 30.
namespace device {
inline constexpr double kK = -38741481.41770989;
inline constexpr double kKerrRatio = -8.8084261004733e-4;
inline constexpr double kGamma = 1466076571.6752368;
inline constexpr double kLj = 1.6455298923772664e-10;
inline constexpr double kC = 3.1415097160884921e-12;
inline constexpr double kEj = 6.5821195695090657e-22;
inline constexpr double kAlphaInCritSquared = 10677146501.598261;
inline constexpr double kIcForRatioMinusOne = 5.2850556602840041e-8;
}  // namespace device

struct Cusp {
    double q;
    int terms;  // 0 = all orders
    double omega, r;
};
inline constexpr Cusp kCusps[] = {
    {30, 0, 0.97087674046475619, 1.0132744315040933},
    {10, 0, 0.91091238, 1.04289499},
    {150, 0, 0.99421655, 1.00258316},
    {30, 2, 0.97087324, 1.01341162},
};
inline constexpr double kCuspNQ30 = 0.019671222103706882;

// max over omega of G(0) at r = 0.99.
struct GainMax {
    double q;
    int terms;
    double omega, G_db;
};
inline constexpr GainMax kGainMax[] = {
    {10, 1, 0.914554075840111, 38.6782141916402},   {10, 2, 0.916785141985617, 24.5752507367976},
    {10, 3, 0.916742902404787, 24.793394270642},    {10, 0, 0.916743350924189, 24.7900379323567},
    {30, 1, 0.971518025280347, 38.6782141916402},   {30, 2, 0.971761998515243, 31.4686983064899},
    {30, 3, 0.971760460065767, 31.5166162534374},   {30, 0, 0.971760465731394, 31.516372780962},
    {150, 1, 0.994303605056782, 38.6782141916401},  {150, 2, 0.994313300179279, 36.7129716400253},
    {150, 3, 0.994313287982182, 36.7163300326512},  {150, 0, 0.994313287990284, 36.716326630334},
};

// Q = 30, r = 0.99, phase 0, device above, omega at the all-order gain maximum.
namespace full_q30 {
inline constexpr double kOmega = 0.971760465731394;
inline constexpr double kN = 0.019066660599033487;
inline constexpr double kL1[2] = {-0.016666666666666667, 0.0091728438435129989};
inline constexpr double kL2[2] = {0.015917962006123955, 0.009595728598179788};
inline constexpr double kAlpha[2] = {4.0509963926113352, -2.2880912941075036};
inline constexpr double kC1[2] = {-0.0019395633061087835, 0.0034339381372248848};
inline constexpr double kC2[2] = {0.0019395633061087835, 0.0034339381372248848};
inline constexpr double kC3Imag = 0.00027164459215954022;
}  // namespace full_q30

// Same, order N = 1 at its own gain maximum.
namespace cubic_q30 {
inline constexpr double kOmega = 0.97151802528034693;
inline constexpr double kN = 0.0189879831551506;
inline constexpr double kL1[2] = {-0.016666666666666667, 0.0094939915906481311};
inline constexpr double kL2[2] = {0.016332795311772048, 0.0096841779002680425};
inline constexpr double kAlpha[2] = {4.0342801963118315, -2.2980853291574335};
inline constexpr double kC1[2] = {-0.0020242514794465204, 0.0035535658977815847};
inline constexpr double kC3Imag = 0.00029361420334911134;
}  // namespace cubic_q30

// All-order r matching the N = 1, r = 0.99 maximal gain at Q = 30.
inline constexpr double kMatchedR = 1.002960511;

}  // namespace frozen
