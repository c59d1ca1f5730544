# Test package for the correlation clustering project
