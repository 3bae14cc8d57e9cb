SPEED_OF_LIGHT = 3e8  # m/s; rounded value keeps bin/wrap figures at their quoted digits
