# sicbench command line
