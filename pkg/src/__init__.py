# GDM ensemble classifier package
