"""
The flight, sensing and perception models of the simulator
"""
