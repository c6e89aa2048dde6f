"""Terminal motion and UAV attitude.

Integrates a circular UAV track and a straight vehicle track, then looks at
how a rotating pitch angle moves the antenna lobe and the PVF coefficient.
"""
# %%
import numpy as np

from u2gchan.scenario import AngleTrack, PostureTrack, TrajectoryTrack, velocity_rotation_matrix
from u2gchan.smallscale import los_path_angles, pvf_coefficient

uav = TrajectoryTrack([100.0, 0.0, 150.0], "circular", center=[0.0, 0.0], angular_rate=0.3)
car = TrajectoryTrack([-100.0, 30.0, 0.0], velocity=[20.0, 0.0, 0.0])
t = np.linspace(0.0, 10.0, 6)

print("t [s]   UAV position [m]              vehicle position [m]")
for ti, a, b in zip(t, uav.position(t), car.position(t)):
    print(f"{ti:4.1f}  {np.array2string(a, precision=1):28s}  {np.array2string(b, precision=1)}")

# %% speed stays at R * rate = 30 m/s on the arc
print("UAV speed:", np.linalg.norm(uav.velocity_at(t), axis=1).round(6))

# %% LoS angles seen from each end
az_t, el_t, az_r, el_r = los_path_angles(uav.position(t), car.position(t))
print("departure elevation [deg]:", np.degrees(el_t).round(1))
print("arrival elevation   [deg]:", np.degrees(el_r).round(1))

# %% the Rx local frame follows its heading
print("vehicle frame x-axis:", velocity_rotation_matrix(car.velocity_at(0.0))[:, 0])

# %% pitch rotating at pi/4 rad/s: the fuselage shadows the lobe twice per turn
posture = PostureTrack(pitch=AngleTrack(0.0, np.pi / 4))
tt = np.linspace(0.0, 10.0, 21)
roll, pitch, yaw = posture.angles(tt)
cp = pvf_coefficient(roll, pitch, yaw, (np.pi / 2,) * 3)
for ti, p, c in zip(tt, pitch, cp):
    print(f"t = {ti:4.1f} s  pitch = {np.degrees(p):7.1f} deg  C_P = {c:.3f}  " + "#" * int(round(30 * c)))
