"""
Far-field downwash below a hovering quadrotor
=============================================

Evaluate the jet model for the bundled vehicles and show how the flow
collapses onto one curve once speeds and lengths are normalized.
"""

import numpy as np

from downwash import DEFAULT_ENVIRONMENT, DEFAULT_JET, far_field_speed, half_width_norm, hover_velocity, presets

env = DEFAULT_ENVIRONMENT

# induced velocity sets the speed scale of every vehicle
for drone in presets().values():
    tag = " (canted, qualitative only)" if drone.cant.value != "uncanted" else ""
    print(f"{drone.name:12s} U_H = {hover_velocity(drone, env):5.2f} m/s  l = {drone.motor_distance:.3f} m{tag}")

# centerline decay and jet growth below the Kolibri, in body lengths
kolibri = presets()["kolibri"]
l = kolibri.motor_distance
s_norm = np.array([2.5, 3.0, 5.0, 10.0, 20.0])
u_axis = far_field_speed(kolibri, env, DEFAULT_JET, s_norm * l, 0.0)
print("\n s/l   U_C (m/s)   r_half/l")
for s, u in zip(s_norm, u_axis):
    print(f"{s:5.1f}   {u:8.3f}   {half_width_norm(s):8.3f}")

# a lateral cut three body lengths down
r = np.linspace(0.0, 2.0, 9) * l
print("\n r/l   U (m/s)")
for ri, u in zip(r / l, far_field_speed(kolibri, env, DEFAULT_JET, 3 * l, r)):
    print(f"{ri:4.2f}   {u:7.3f}")

# normalized by U_H and l, two very different vehicles give the same numbers
matrice = presets()["matrice300"]
for drone in (kolibri, matrice):
    u = far_field_speed(drone, env, DEFAULT_JET, 4 * drone.motor_distance, 0.5 * drone.motor_distance)
    print(f"\n{drone.name}: U / U_H at (s, r) = (4 l, 0.5 l) is {u / hover_velocity(drone, env):.6f}")
