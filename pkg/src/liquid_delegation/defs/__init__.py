# Component instances under defs/ are discovered by load_from_defs_folder
