#!/usr/bin/env python3
# Copyright 2026 The ctsdr Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent closed-form reference values, frozen into tests/oracle_values.hpp.

Uses mpmath only; shares no code with the C++ library. Rerun with
`python3 tests/oracle/oracle.py > tests/oracle_values.hpp` after a
deliberate model change.
"""
import mpmath as mp

mp.mp.dps = 40

def second_moment(od, wall):
    return mp.pi / 64 * (od**4 - (od - 2 * wall)**4)

def planar_tip(radius, length):
    # Arc in the (x, y) plane starting at the origin along +x, bending to +y.
    a = length / radius
    return (radius * mp.sin(a), radius * (1 - mp.cos(a)))

R = mp.mpf(50)
I_o = second_moment(mp.mpf('3.61'), mp.mpf('0.25'))
I_i = second_moment(mp.mpf('2.6'), mp.mpf('0.2'))
rho = I_o / I_i

# Opposed tubes of equal pre-curvature: k = k0 (rho - 1) / (rho + 1).
opposed_radius = R * (rho + 1) / (rho - 1)
# Relative roll 90 deg: weighted vector sum.
right_radius = R * (rho + 1) / mp.sqrt(rho**2 + 1)
right_angle = mp.degrees(mp.atan2(1, rho))

tip_x, tip_y = planar_tip(R, mp.mpf(50))

# rho from an observed overlap radius, inverting the opposed formula.
observed = mp.mpf('232.3')
rho_cal = (observed + R) / (observed - R)

# In-place 180 deg inner roll with both tubes flush at 20 mm: the tip moves
# from the aligned R50 arc end to the opposed-blend arc end.
ax, ay = planar_tip(R, mp.mpf(20))
bx, by = planar_tip(opposed_radius, mp.mpf(20))
s1_jump = mp.sqrt((ax - bx)**2 + (ay - by)**2)

cut_r = mp.mpf(3)
capsule_volume = mp.pi * cut_r**2 * 50 + mp.mpf(4) / 3 * mp.pi * cut_r**3
sphere_volume = mp.mpf(4) / 3 * mp.pi * cut_r**3

# S2 insertion: 10.8 mm pre-extension + 29.9 mm co-advance + 50 mm inner advance at 1.65 mm/s.
s2_time = (mp.mpf('10.8') + mp.mpf('29.9') + 50) / mp.mpf('1.65')

values = [
    ("kOuterSecondMoment", I_o, "mm^4"),
    ("kInnerSecondMoment", I_i, "mm^4"),
    ("kStiffnessRatio", rho, ""),
    ("kOpposedBlendRadius", opposed_radius, "mm"),
    ("kRightAngleBlendRadius", right_radius, "mm"),
    ("kRightAngleBlendDirectionDeg", right_angle, "deg from the outer bend direction"),
    ("kSingleArcTipX", tip_x, "mm, R50 arc, 50 mm"),
    ("kSingleArcTipY", tip_y, "mm"),
    ("kCalibratedRatio", rho_cal, "observed 232.3 mm over R50"),
    ("kS1RollJump", s1_jump, "mm"),
    ("kCapsuleVolume", capsule_volume, "mm^3, r 3 mm, 50 mm long"),
    ("kSphereVolume", sphere_volume, "mm^3, r 3 mm"),
    ("kS2InsertionTime", s2_time, "s"),
]

print("// Copyright 2026 The ctsdr Authors")
print("// SPDX-License-Identifier: Apache-2.0")
print("//")
print("// Generated by tests/oracle/oracle.py. Do not edit by hand.")
print()
print("#pragma once")
print()
print("namespace oracle {")
print()
for name, value, unit in values:
    comment = f"  // {unit}" if unit else ""
    print(f"inline constexpr double {name} = {mp.nstr(value, 15)};{comment}")
print()
print("}  // namespace oracle")
