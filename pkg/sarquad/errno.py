# Uncatched python exception
UNHANDLED_ERROR = 1
# An error occurred while handling the execution command or the mission config
CONFIG_ERROR = 2
# The simulated vehicle diverged (non-finite state or gimbal-lock region)
SIMULATION_DIVERGED = 3
